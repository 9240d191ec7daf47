#include "sklab/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {

void ModelParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw DomainError("model parameters: beta must be finite and >= 0");
  }
  if (!(h >= 0.0) || !std::isfinite(h)) {
    throw DomainError("model parameters: h must be finite and >= 0");
  }
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

double q_map(double q, const ModelParams& p, const Quadrature& rule) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  return expect_gaussian(
      [&](double z) {
        const double t = std::tanh(s * z + p.h);
        return t * t;
      },
      rule);
}

double at_gap(double q, const ModelParams& p, const Quadrature& rule) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  const double e = expect_gaussian(
      [&](double z) {
        const double c = std::cosh(s * z + p.h);
        const double c2 = 1.0 / (c * c);
        return c2 * c2;
      },
      rule);
  return p.beta * p.beta * e;
}

ScalarSolution solve_q(const ModelParams& p, const SolveQOptions& opt, const Quadrature& rule) {
  p.validate();
  if (!(opt.tol > 0.0)) throw DomainError("solve_q: tol must be > 0");

  auto residual = [&](double q) { return q - q_map(q, p, rule); };

  double q = 1.0;
  double r = residual(q);
  for (std::size_t it = 0; it < opt.max_fixed_point_iters && std::abs(r) >= opt.tol; ++it) {
    q = std::clamp(q - opt.damping * r, 0.0, 1.0);
    r = residual(q);
  }

  if (std::abs(r) >= opt.tol) {
    // q - E tanh^2 is <= 0 at q = 0 and >= 0 at q = 1.
    double lo = 0.0;
    double hi = 1.0;
    for (std::size_t it = 0; it < opt.max_bisection_iters; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double rm = residual(mid);
      if (std::abs(rm) < std::abs(r)) {
        q = mid;
        r = rm;
      }
      if (std::abs(rm) < opt.tol || hi - lo < 1e-17) break;
      (rm < 0.0 ? lo : hi) = mid;
    }
  }

  if (std::abs(r) < opt.tol && r != 0.0) {
    // Secant polish from one undamped step; keeps the best iterate.
    double q0 = q;
    double r0 = r;
    double q1 = std::clamp(q - r, 0.0, 1.0);
    double r1 = residual(q1);
    for (int it = 0; it < 30; ++it) {
      if (std::abs(r1) < std::abs(r)) {
        q = q1;
        r = r1;
      }
      if (r1 == 0.0 || r1 == r0) break;
      const double q2 = std::clamp(q1 - r1 * (q1 - q0) / (r1 - r0), 0.0, 1.0);
      const double r2 = residual(q2);
      if (!(std::abs(r2) < std::abs(r1))) {
        if (std::abs(r2) < std::abs(r)) {
          q = q2;
          r = r2;
        }
        break;
      }
      q0 = q1;
      r0 = r1;
      q1 = q2;
      r1 = r2;
    }
  }

  if (!(std::abs(r) < opt.tol)) {
    std::ostringstream msg;
    msg << "solve_q: no convergence for beta = " << p.beta << ", h = " << p.h
        << "; last residual " << r;
    throw ConvergenceError(msg.str());
  }
  return ScalarSolution{q, at_gap(q, p, rule), r};
}

double big_q(const ModelParams& p, double q, const Quadrature& rule) {
  const double sq = std::sqrt(std::max(q, 0.0));
  const double s = p.beta * sq;
  return sq * expect_gaussian([&](double z) { return std::tanh(s * z + p.h); }, rule);
}

double gamma_map(double t, double gam, double gamp, const ModelParams& p,
                 const Quadrature& rule) {
  if (!(std::abs(t) <= 1.0)) {
    std::ostringstream msg;
    msg << "gamma_map: |t| must be <= 1 (got t = " << t << ")";
    throw DomainError(msg.str());
  }
  if (gam < 0.0 || gamp < 0.0) throw DomainError("gamma_map: gamma arguments must be >= 0");

  const double at = std::abs(t);
  const double sgn = t < 0.0 ? -1.0 : 1.0;
  const double shared1 = p.beta * std::sqrt(gam * at);
  const double own1 = p.beta * std::sqrt(gam * (1.0 - at));
  const double shared2 = sgn * p.beta * std::sqrt(gamp * at);
  const double own2 = p.beta * std::sqrt(gamp * (1.0 - at));

  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  double acc = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double c1 = shared1 * x[a] + p.h;
    const double c2 = shared2 * x[a] + p.h;
    double in1 = 0.0;
    double in2 = 0.0;
    for (std::size_t b = 0; b < x.size(); ++b) {
      in1 += w[b] * std::tanh(c1 + own1 * x[b]);
      in2 += w[b] * std::tanh(c2 + own2 * x[b]);
    }
    acc += w[a] * in1 * in2;
  }
  return acc;
}

DeltaValue delta_map(double t, const ModelParams& p, double q, const Quadrature& rule) {
  DeltaValue out;
  if (q <= 0.0) {
    out.clamped = t != 0.0;
    out.value = gamma_map(0.0, 0.0, 0.0, p, rule);
    return out;
  }
  if (t > q) {
    t = q;
    out.clamped = true;
  } else if (t < -q) {
    t = -q;
    out.clamped = true;
  }
  out.value = gamma_map(std::clamp(t / q, -1.0, 1.0), q, q, p, rule);
  return out;
}

std::vector<double> delta_orbit(const ModelParams& p, double q, std::size_t steps, double tol,
                                const Quadrature& rule) {
  if (steps < 1) throw DomainError("delta_orbit: need at least one step");
  std::vector<double> orbit;
  orbit.reserve(steps + 1);
  orbit.push_back(big_q(p, q, rule));
  for (std::size_t k = 0; k < steps; ++k) {
    const double next = delta_map(orbit.back(), p, q, rule).value;
    const double diff = std::abs(next - orbit.back());
    orbit.push_back(next);
    if (diff < tol) break;
  }
  return orbit;
}

double rs_free_energy(const ModelParams& p, double q, const Quadrature& rule) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  const double e = expect_gaussian([&](double z) { return log_cosh(s * z + p.h); }, rule);
  const double one_minus_q = 1.0 - q;
  return std::numbers::ln2 + 0.25 * p.beta * p.beta * one_minus_q * one_minus_q + e;
}

}  // namespace sklab
