#pragma once

#include <cstddef>
#include <vector>

#include "sklab/quadrature.hpp"

namespace sklab {

/// Inverse temperature and uniform external field of the SK model.
///
/// The model is defined for beta > 0 and h > 0.  The zero values are accepted
/// so that the decoupled (beta = 0) and symmetric (h = 0) limits can be
/// evaluated; negative values are rejected.
struct ModelParams {
  double beta = 1.0;
  double h = 0.5;

  void validate() const;
};

/// Solution of q = E tanh^2(beta z sqrt(q) + h) together with the
/// Almeida-Thouless quantity beta^2 E cosh^-4(beta z sqrt(q) + h).
struct ScalarSolution {
  double q = 0.0;
  double at_gap = 0.0;
  double q_residual = 0.0;

  /// Strictly inside the AT line.
  bool inside_at() const { return at_gap < 1.0; }
};

struct SolveQOptions {
  double tol = 1e-13;
  double damping = 0.5;
  std::size_t max_fixed_point_iters = 2000;
  std::size_t max_bisection_iters = 200;
};

/// Damped fixed-point iteration from q = 1 with a bisection fallback on [0, 1].
/// Throws ConvergenceError (with the last residual) if neither meets tol.
ScalarSolution solve_q(const ModelParams& p, const SolveQOptions& opt = {},
                       const Quadrature& rule = default_rule());

/// E tanh^2(beta z sqrt(q) + h) for a given q.
double q_map(double q, const ModelParams& p, const Quadrature& rule = default_rule());

/// beta^2 E cosh^-4(beta z sqrt(q) + h).
double at_gap(double q, const ModelParams& p, const Quadrature& rule = default_rule());

/// Q(beta, h) = sqrt(q) E tanh(beta z sqrt(q) + h).
double big_q(const ModelParams& p, double q, const Quadrature& rule = default_rule());

/// Gamma(t; g, g') = E Th(beta z sqrt(g|t|) + beta z1 sqrt(g(1-|t|)))
///                    * Th(beta sign(t) z sqrt(g'|t|) + beta z2 sqrt(g'(1-|t|)))
/// with Th(x) = tanh(x + h).  Evaluated as an outer rule over z of the product
/// of two inner one-dimensional rules.  Throws DomainError for |t| > 1.
double gamma_map(double t, double gam, double gamp, const ModelParams& p,
                 const Quadrature& rule = default_rule());

struct DeltaValue {
  double value = 0.0;
  bool clamped = false;
};

/// Delta(t) = Gamma(t/q; q, q) on [-q, q].  Arguments outside the interval are
/// clamped onto it and the flag is set.
DeltaValue delta_map(double t, const ModelParams& p, double q,
                     const Quadrature& rule = default_rule());

/// [Q, Delta(Q), Delta(Delta(Q)), ...] with at most steps + 1 entries; stops
/// once two successive entries differ by less than tol.
std::vector<double> delta_orbit(const ModelParams& p, double q, std::size_t steps, double tol,
                                const Quadrature& rule = default_rule());

/// log 2 + beta^2/4 (1-q)^2 + E log cosh(beta z sqrt(q) + h).
double rs_free_energy(const ModelParams& p, double q, const Quadrature& rule = default_rule());

/// Overflow-free log cosh.
double log_cosh(double x);

}  // namespace sklab
