#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sklab/function_seq.hpp"
#include "sklab/quadrature.hpp"

namespace sklab {

/// Finite-atom law for the initial coordinate W_0: (value, probability) pairs.
class AtomLaw {
 public:
  struct Atom {
    double value;
    double prob;
  };

  explicit AtomLaw(std::vector<Atom> atoms);
  static AtomLaw constant(double c) { return AtomLaw({{c, 1.0}}); }

  /// Parses "v1:p1,v2:p2,..." (a bare "c" means the constant c).
  static AtomLaw parse(const std::string& text);
  std::string to_string() const;

  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Sum_a p_a g(v_a).
  template <class G>
  double expect(G&& g) const {
    double acc = 0.0;
    for (const auto& a : atoms_) acc += a.prob * g(a.value);
    return acc;
  }

  /// Deterministic length-n vector whose empirical law matches the atoms:
  /// entry i takes the atom whose cumulative interval contains (i + 1/2)/n.
  std::vector<double> stratified_sample(std::size_t n) const;

 private:
  std::vector<Atom> atoms_;
};

/// sigma(a, b) = E W_{a+1} W_{b+1} for 0 <= a, b < depth.
class CovarianceTable {
 public:
  CovarianceTable(std::size_t depth, AtomLaw w0);

  std::size_t depth() const { return depth_; }
  double operator()(std::size_t a, std::size_t b) const { return sigma_[a * depth_ + b]; }
  double& at(std::size_t a, std::size_t b) { return sigma_[a * depth_ + b]; }
  const AtomLaw& w0_law() const { return w0_; }

  /// Covariance of (W_a, W_b) for a, b >= 1 in the Gaussian block.
  double cov_w(std::size_t a, std::size_t b) const { return (*this)(a - 1, b - 1); }

  /// Smallest eigenvalue of sigma (Jacobi sweeps), used for the PSD check.
  double min_eigenvalue() const;

 private:
  std::size_t depth_;
  AtomLaw w0_;
  std::vector<double> sigma_;
};

/// Builds the covariance of (W_1, ..., W_depth) from E W_{a+1} W_{b+1} =
/// E f_a(W_a) f_b(W_b), with W_0 ~ w0 independent of the Gaussian block.
/// Throws ConsistencyError when sigma leaves the PSD cone by more than 1e-10.
CovarianceTable state_evolution(const FunctionSeq& fs, const AtomLaw& w0, std::size_t depth,
                                const Quadrature& rule = default_rule());

}  // namespace sklab
