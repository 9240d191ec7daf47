#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sklab {

/// Expectation rule against the standard normal density: E g(z) ~ sum_k w_k g(x_k).
///
/// Nodes are stored in ascending order and are exactly antisymmetric
/// (x_k == -x_{m-1-k}); weights are positive and symmetric.
class Quadrature {
 public:
  Quadrature(std::vector<double> nodes, std::vector<double> weights);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline constexpr std::size_t kDefaultQuadratureNodes = 64;

/// Gauss-Hermite rule in probabilist normalization with m nodes.
/// Exact for polynomials of degree <= 2m-1 under z ~ N(0,1).
Quadrature gauss_hermite(std::size_t m);

/// Shared 64-node rule, built once.
const Quadrature& default_rule();

using ScalarFn = std::function<double(double)>;

/// E g(z), z ~ N(0,1).  Throws EvaluationError if g is non-finite at a node.
double expect_gaussian(const ScalarFn& g, const Quadrature& rule = default_rule());

/// E g1(X) g2(Y) for a centered Gaussian pair with covariance
/// [[var1, cov], [cov, var2]], via a Cholesky factor and the tensor rule.
/// Throws DomainError when the covariance is indefinite beyond 1e-12.
double expect_bivariate(const ScalarFn& g1, const ScalarFn& g2, double var1, double var2,
                        double cov, const Quadrature& rule = default_rule());

}  // namespace sklab
