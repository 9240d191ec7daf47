#include "sklab/gibbs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "sklab/amp.hpp"
#include "sklab/error.hpp"

namespace sklab {

double GibbsSummary::magnetization(std::size_t i) const {
  const auto it = std::lower_bound(sites.begin(), sites.end(), i);
  if (it == sites.end() || *it != i) {
    throw DomainError("GibbsSummary: site " + std::to_string(i) + " is excluded");
  }
  return magnetizations[static_cast<std::size_t>(it - sites.begin())];
}

GibbsSummary exact_gibbs(const DisorderMatrix& a, const ModelParams& p, const IndexSet& s,
                         const GibbsOptions& opt) {
  p.validate();
  const std::size_t n = a.n();
  for (std::size_t i : s) {
    if (i >= n) throw DomainError("exact_gibbs: excluded index out of range");
  }
  GibbsSummary out;
  out.excluded = s;
  out.n_full = n;
  for (std::size_t i = 0; i < n; ++i)
    if (!s.contains(i)) out.sites.push_back(i);
  const std::size_t m = out.sites.size();
  if (m > kMaxEnumeratedSpins) {
    std::ostringstream msg;
    msg << "exact_gibbs: " << m << " free spins exceed the enumeration cap of "
        << kMaxEnumeratedSpins;
    throw ResourceError(msg.str());
  }

  const double scale = p.beta / std::sqrt(static_cast<double>(n));
  std::vector<double> c(m * m, 0.0);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y)
      if (x != y) c[x * m + y] = scale * a(out.sites[x], out.sites[y]);

  // Start from all spins down.
  std::vector<double> spin(m, -1.0);
  std::vector<double> field(m, 0.0);
  double logw = -p.h * static_cast<double>(m);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) field[x] -= c[x * m + y];
    for (std::size_t y = x + 1; y < m; ++y) logw += c[x * m + y];
  }

  const bool pairs = opt.pair_correlations;
  double shift = logw;
  double z = 0.0;
  std::vector<double> mag(m, 0.0);
  std::vector<double> pair(pairs ? m * m : 0, 0.0);

  auto accumulate = [&] {
    if (logw > shift) {
      const double r = std::exp(shift - logw);
      z *= r;
      for (auto& v : mag) v *= r;
      for (auto& v : pair) v *= r;
      shift = logw;
    }
    const double w = std::exp(logw - shift);
    z += w;
    for (std::size_t x = 0; x < m; ++x) {
      const double wx = w * spin[x];
      mag[x] += wx;
      if (pairs) {
        double* row = pair.data() + x * m;
        for (std::size_t y = x + 1; y < m; ++y) row[y] += wx * spin[y];
      }
    }
  };

  accumulate();
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t t = 1; t < total; ++t) {
    const auto flip = static_cast<std::size_t>(std::countr_zero(t));
    logw -= 2.0 * spin[flip] * (field[flip] + p.h);
    spin[flip] = -spin[flip];
    const double d = 2.0 * spin[flip];
    const double* col = c.data() + flip * m;
    for (std::size_t y = 0; y < m; ++y) field[y] += d * col[y];
    accumulate();
  }

  out.log_z = shift + std::log(z);
  out.min_energy = -shift;
  out.magnetizations.resize(m);
  for (std::size_t x = 0; x < m; ++x) out.magnetizations[x] = mag[x] / z;
  if (pairs) {
    out.pair_corr.assign(m * m, 1.0);
    for (std::size_t x = 0; x < m; ++x) {
      for (std::size_t y = x + 1; y < m; ++y) {
        const double v = pair[x * m + y] / z;
        out.pair_corr[x * m + y] = v;
        out.pair_corr[y * m + x] = v;
      }
    }
  }
  return out;
}

OverlapMoments overlap_moments(const GibbsSummary& g, double q) {
  if (!g.has_pairs()) throw DomainError("overlap_moments: summary lacks pair correlations");
  const std::size_t m = g.n_eff();
  OverlapMoments out;
  if (m == 0) return out;
  const double md = static_cast<double>(m);
  for (double v : g.magnetizations) out.mean_r += v * v;
  out.mean_r /= md;
  for (double v : g.pair_corr) out.second_r += v * v;
  out.second_r /= md * md;
  out.concentration = out.second_r - 2.0 * q * out.mean_r + q * q;
  return out;
}

const GibbsSummary& GibbsCache::get(const IndexSet& s) {
  auto it = cache_.find(s);
  if (it == cache_.end()) it = cache_.emplace(s, exact_gibbs(*a_, p_, s, opt_)).first;
  return it->second;
}

double cavity_residual(const IndexSet& s, std::size_t i, GibbsCache& cache) {
  if (s.contains(i)) throw DomainError("cavity_residual: i must not belong to S");
  const auto& a = cache.matrix();
  const auto& p = cache.params();
  const double lhs = cache.get(s).magnetization(i);
  const IndexSet si = s.with(i);
  const auto& inner = cache.get(si);
  double acc = 0.0;
  for (std::size_t x = 0; x < inner.sites.size(); ++x) acc += a(i, inner.sites[x]) * inner.magnetizations[x];
  const double scale = p.beta / std::sqrt(static_cast<double>(a.n()));
  return lhs - std::tanh(scale * acc + p.h);
}

FreeEnergyCheck free_energy_check(const DisorderMatrix& a, const ModelParams& p, double q) {
  const auto g = exact_gibbs(a, p, {}, {.pair_correlations = false});
  return {g.log_z / static_cast<double>(a.n()), rs_free_energy(p, q)};
}

std::vector<double> tap_residual(const DisorderMatrix& a, const ModelParams& p,
                                 std::span<const double> m) {
  const std::size_t n = a.n();
  if (m.size() != n) throw DomainError("tap_residual: magnetization length != n");
  const double scale = p.beta / std::sqrt(static_cast<double>(n));
  const double onsager = p.beta * p.beta * (1.0 - sq_norm(m));
  const auto field = mat_vec(a, m);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = m[i] - std::tanh(scale * field[i] + p.h - onsager * m[i]);
  }
  return out;
}

}  // namespace sklab
