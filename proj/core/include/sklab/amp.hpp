#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sklab/disorder.hpp"
#include "sklab/function_seq.hpp"
#include "sklab/scalar.hpp"

namespace sklab {

/// Iterates x^[0..K] of one engine, each an n-vector.
struct IterTrace {
  std::vector<std::vector<double>> levels;

  std::size_t depth() const { return levels.empty() ? 0 : levels.size() - 1; }
  std::size_t n() const { return levels.empty() ? 0 : levels.front().size(); }
  const std::vector<double>& operator[](std::size_t k) const { return levels[k]; }

  /// (1/n) sum_i x_i^2 per level.
  std::vector<double> sq_norms() const;
};

/// ||x||^2 = (1/n) sum_i x_i^2.
double sq_norm(std::span<const double> x);

/// AMP: u^[0] = u0, u^[1] = A f_0(u^[0]) / sqrt(n), and for k >= 1
///   u^[k+1] = A f_k(u^[k]) / sqrt(n) - <f_k'(u^[k])> f_{k-1}(u^[k-1]).
/// Throws DomainError if (1/n)|u0|^2 > 1 or the length is wrong.
IterTrace amp_run(const DisorderMatrix& a, std::span<const double> u0, const FunctionSeq& fs,
                  std::size_t depth);

struct BolthausenRun {
  IterTrace m;  // Bolthausen's iterates m^[0..K]
  IterTrace u;  // AMP iterates with the Bolthausen denoisers and u = 0
  /// max_i |m^[k]_i - f_k(u^[k]_i)| per level.
  std::vector<double> identity_deviation;
};

/// m^[0] = 0, m^[1] = sqrt(q) 1, and
///   m^[k+1] = tanh(beta A m^[k] / sqrt(n) + h - beta^2 (1 - |m^[k]|^2) m^[k-1]).
/// Cross-checks m^[k] = f_k(u^[k]) against amp_run with bolthausen_seq and
/// throws ConsistencyError if any level deviates by more than 1e-10.
BolthausenRun bolthausen_run(const DisorderMatrix& a, const ModelParams& p, double q,
                             std::size_t depth);

}  // namespace sklab
