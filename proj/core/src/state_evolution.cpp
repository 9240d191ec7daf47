#include "sklab/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {

AtomLaw::AtomLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("AtomLaw: at least one atom is required");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.prob > 0.0) || !std::isfinite(a.value)) {
      throw DomainError("AtomLaw: atoms need finite values and positive probabilities");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "AtomLaw: probabilities must sum to 1 (got " << total << ")";
    throw DomainError(msg.str());
  }
}

AtomLaw AtomLaw::parse(const std::string& text) {
  std::vector<Atom> atoms;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        atoms.push_back({std::stod(item), 1.0});
      } else {
        atoms.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      }
    } catch (const std::logic_error&) {
      throw DomainError("AtomLaw: cannot parse atom '" + item + "' (expected value:prob)");
    }
  }
  return AtomLaw(std::move(atoms));
}

std::string AtomLaw::to_string() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out << ',';
    out << atoms_[i].value << ':' << atoms_[i].prob;
  }
  return out.str();
}

std::vector<double> AtomLaw::stratified_sample(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double cum = 0.0;
    std::size_t a = 0;
    for (; a + 1 < atoms_.size(); ++a) {
      cum += atoms_[a].prob;
      if (u < cum) break;
    }
    out[i] = atoms_[a].value;
  }
  return out;
}

CovarianceTable::CovarianceTable(std::size_t depth, AtomLaw w0)
    : depth_(depth), w0_(std::move(w0)), sigma_(depth * depth, 0.0) {}

double CovarianceTable::min_eigenvalue() const {
  if (depth_ == 0) return 0.0;
  std::vector<double> m = sigma_;
  const std::size_t d = depth_;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += m[p * d + q] * m[p * d + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = m[p * d + q];
        if (apq == 0.0) continue;
        const double theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double mkp = m[k * d + p];
          const double mkq = m[k * d + q];
          m[k * d + p] = c * mkp - s * mkq;
          m[k * d + q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double mpk = m[p * d + k];
          const double mqk = m[q * d + k];
          m[p * d + k] = c * mpk - s * mqk;
          m[q * d + k] = s * mpk + c * mqk;
        }
      }
    }
  }
  double lo = m[0];
  for (std::size_t k = 1; k < d; ++k) lo = std::min(lo, m[k * d + k]);
  return lo;
}

CovarianceTable state_evolution(const FunctionSeq& fs, const AtomLaw& w0, std::size_t depth,
                                const Quadrature& rule) {
  if (depth < 1) throw DomainError("state_evolution: depth must be >= 1");
  CovarianceTable table(depth, w0);

  const double mean_f0 = w0.expect([&](double v) { return fs(0, v); });
  table.at(0, 0) = w0.expect([&](double v) {
    const double f = fs(0, v);
    return f * f;
  });

  for (std::size_t a = 1; a < depth; ++a) {
    // Row a pairs f_a(W_a) with f_b(W_b) for b <= a.
    const double var_a = table.cov_w(a, a);
    if (var_a < -1e-10) throw ConsistencyError("state_evolution: negative variance");
    const double sd_a = std::sqrt(std::max(var_a, 0.0));
    const double mean_fa = expect_gaussian([&](double z) { return fs(a, sd_a * z); }, rule);
    table.at(a, 0) = table.at(0, a) = mean_f0 * mean_fa;
    for (std::size_t b = 1; b <= a; ++b) {
      double v = 0.0;
      try {
        v = expect_bivariate([&](double x) { return fs(a, x); }, [&](double y) { return fs(b, y); },
                             var_a, table.cov_w(b, b), table.cov_w(a, b), rule);
      } catch (const DomainError& e) {
        throw ConsistencyError(std::string("state_evolution: covariance lost positive "
                                           "semidefiniteness: ") + e.what());
      }
      table.at(a, b) = table.at(b, a) = v;
    }
  }

  const double lo = table.min_eigenvalue();
  if (lo < -1e-10) {
    std::ostringstream msg;
    msg << "state_evolution: covariance has eigenvalue " << lo << " below -1e-10";
    throw ConsistencyError(msg.str());
  }
  return table;
}

}  // namespace sklab
