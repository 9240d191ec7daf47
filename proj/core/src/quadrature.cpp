#include "sklab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {

Quadrature::Quadrature(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.empty() || nodes_.size() != weights_.size()) {
    throw DomainError("quadrature: nodes and weights must be non-empty and of equal length");
  }
}

namespace {

// Orthonormal (physicist) Hermite values p_m(z), p_{m-1}(z) by the three-term
// recurrence.  Both are rescaled together to avoid overflow near the largest
// roots for big m; log_scale receives the natural log of the factor removed.
struct HermitePair {
  double pm;
  double pm1;
  double log_scale;
};

HermitePair hermite_pair(std::size_t m, double z) {
  constexpr double kBig = 0x1.0p+500;
  HermitePair out{std::pow(std::numbers::pi, -0.25), 0.0, 0.0};
  for (std::size_t j = 1; j <= m; ++j) {
    const double jd = static_cast<double>(j);
    const double p3 = out.pm1;
    out.pm1 = out.pm;
    out.pm = z * std::sqrt(2.0 / jd) * out.pm1 - std::sqrt((jd - 1.0) / jd) * p3;
    if (std::abs(out.pm) > kBig) {
      out.pm /= kBig;
      out.pm1 /= kBig;
      out.log_scale += 500.0 * std::numbers::ln2;
    }
  }
  return out;
}

// Roots of H_m, non-negative half, largest first.  Each root is bracketed by
// a sign scan on a grid ten times finer than the smallest root spacing
// (about pi / sqrt(2m)), then polished by Newton steps kept inside the bracket.
void hermite_half(std::size_t m, std::vector<double>& x, std::vector<double>& w) {
  const std::size_t half = (m + 1) / 2;
  const double md = static_cast<double>(m);
  const double step = 0.1 * std::numbers::pi / std::sqrt(2.0 * md + 1.0);
  const double floor = (m % 2 == 1) ? 0.5 * step : 0.0;
  x.clear();
  w.clear();

  auto polish = [&](double lo, double hi) {
    double flo = hermite_pair(m, lo).pm;
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const HermitePair hp = hermite_pair(m, z);
      if (hp.pm == 0.0) break;
      if ((hp.pm > 0.0) == (flo > 0.0)) {
        lo = z;
        flo = hp.pm;
      } else {
        hi = z;
      }
      double next = z - hp.pm / (std::sqrt(2.0 * md) * hp.pm1);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - z) <= 1e-15 * std::max(1.0, std::abs(z));
      z = next;
      if (done) break;
    }
    return z;
  };

  double hi = std::sqrt(2.0 * md + 1.0) + 1.0;
  double fhi = hermite_pair(m, hi).pm;
  while (hi > floor && x.size() < m / 2) {
    const double lo = std::max(hi - step, floor);
    const double flo = hermite_pair(m, lo).pm;
    if ((flo > 0.0) != (fhi > 0.0) || flo == 0.0) x.push_back(polish(lo, hi));
    hi = lo;
    fhi = flo;
  }
  if (m % 2 == 1) x.push_back(0.0);
  if (x.size() != half) throw Error("gauss_hermite: root bracketing failed");
  for (double z : x) {
    const HermitePair hp = hermite_pair(m, z);
    const double pp = std::sqrt(2.0 * md) * hp.pm1;
    w.push_back(2.0 / (pp * pp) * std::exp(-2.0 * hp.log_scale));
  }
}

}  // namespace

Quadrature gauss_hermite(std::size_t m) {
  if (m == 0) throw DomainError("gauss_hermite: need at least one node");
  std::vector<double> hx;
  std::vector<double> hw;
  hermite_half(m, hx, hw);
  // Physicist rule integrates against exp(-x^2); map to N(0,1) by z = sqrt(2) x
  // and divide weights by sqrt(pi).
  std::vector<double> nodes(m);
  std::vector<double> weights(m);
  const double scale = std::numbers::sqrt2;
  const double wscale = 1.0 / std::sqrt(std::numbers::pi);
  const std::size_t half = hx.size();
  for (std::size_t i = 0; i < half; ++i) {
    // hx[0] is the largest root.
    const double z = scale * hx[i];
    const double wt = wscale * hw[i];
    nodes[i] = -z;
    weights[i] = wt;
    nodes[m - 1 - i] = z;
    weights[m - 1 - i] = wt;
  }
  // Remove the last few ulps of error in the total mass.
  double total = 0.0;
  for (double wt : weights) total += wt;
  for (double& wt : weights) wt /= total;
  return Quadrature(std::move(nodes), std::move(weights));
}

const Quadrature& default_rule() {
  static const Quadrature rule = gauss_hermite(kDefaultQuadratureNodes);
  return rule;
}

double expect_gaussian(const ScalarFn& g, const Quadrature& rule) {
  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double v = g(x[k]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "expect_gaussian: integrand is not finite at node " << k << " (z = " << x[k] << ")";
      throw EvaluationError(msg.str());
    }
    acc += w[k] * v;
  }
  return acc;
}

double expect_bivariate(const ScalarFn& g1, const ScalarFn& g2, double var1, double var2,
                        double cov, const Quadrature& rule) {
  constexpr double kPsdTol = 1e-12;
  if (var1 < -kPsdTol || var2 < -kPsdTol || cov * cov > var1 * var2 + kPsdTol) {
    std::ostringstream msg;
    msg << "expect_bivariate: covariance [[" << var1 << ", " << cov << "], [" << cov << ", "
        << var2 << "]] is not positive semidefinite";
    throw DomainError(msg.str());
  }
  // X = l11 z1, Y = l21 z1 + l22 z2.
  const double l11 = std::sqrt(std::max(var1, 0.0));
  const double l21 = l11 > 0.0 ? cov / l11 : 0.0;
  const double l22 = std::sqrt(std::max(var2 - l21 * l21, 0.0));

  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  double acc = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double gx = g1(l11 * x[a]);
    if (!std::isfinite(gx)) {
      throw EvaluationError("expect_bivariate: first integrand is not finite at node " +
                            std::to_string(a));
    }
    double inner = 0.0;
    for (std::size_t b = 0; b < x.size(); ++b) {
      const double gy = g2(l21 * x[a] + l22 * x[b]);
      if (!std::isfinite(gy)) {
        throw EvaluationError("expect_bivariate: second integrand is not finite at node (" +
                              std::to_string(a) + ", " + std::to_string(b) + ")");
      }
      inner += w[b] * gy;
    }
    acc += w[a] * gx * inner;
  }
  return acc;
}

}  // namespace sklab
