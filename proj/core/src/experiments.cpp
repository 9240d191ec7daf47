#include "sklab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sklab/amp.hpp"
#include "sklab/disorder.hpp"
#include "sklab/error.hpp"
#include "sklab/parallel.hpp"
#include "sklab/rng.hpp"

namespace sklab {

namespace {

constexpr std::uint64_t kStabilityStream = 0x57AB'1117ULL;
constexpr std::uint64_t kSubsetStream = 0x5B5E'7006ULL;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

[[noreturn]] void config_error(const std::string& what) {
  throw DomainError("experiment config: " + what);
}

std::vector<double> iterate_delta(const ModelParams& p, double q, double start, std::size_t steps) {
  std::vector<double> out{start};
  for (std::size_t k = 0; k < steps; ++k) out.push_back(delta_map(out.back(), p, q).value);
  return out;
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

void require_enumerable(const ExperimentConfig& cfg, const char* who) {
  for (std::size_t n : cfg.n_list) {
    if (n > kMaxEnumeratedSpins) {
      std::ostringstream msg;
      msg << who << ": n = " << n << " exceeds the exact-enumeration cap of "
          << kMaxEnumeratedSpins;
      throw ResourceError(msg.str());
    }
  }
}

ScalingReport make_scaling(std::string quantity, std::size_t k,
                           const std::vector<std::size_t>& n_list,
                           const std::vector<std::vector<double>>& samples_per_n) {
  ScalingReport rep;
  rep.quantity = std::move(quantity);
  rep.k = k;
  rep.exact_zero = true;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const auto& s = samples_per_n[idx];
    const MeanSe ms = mean_se(s);
    rep.points.push_back({n_list[idx], ms.mean, ms.se});
    for (double v : s)
      if (v != 0.0) rep.exact_zero = false;
    xs.push_back(static_cast<double>(n_list[idx]));
    ys.push_back(ms.mean);
  }
  const bool positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0.0; });
  if (!rep.exact_zero && positive && xs.size() >= 2) rep.fit = loglog_fit(xs, ys);
  return rep;
}

// Distinct indices from [0, n) drawn by rejection.
std::vector<std::size_t> draw_distinct(CounterRng& rng, std::size_t n, std::size_t count) {
  std::vector<std::size_t> out;
  while (out.size() < count) {
    const auto v = static_cast<std::size_t>(rng.below(n));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

// One test function psi(x_0, ..., x_K) = tanh(b1 + c1.x) * [tanh(b2 + c2.x)].
struct PsiSpec {
  std::string name;
  double b1 = 0.0;
  std::vector<double> c1;
  bool product = false;
  double b2 = 0.0;
  std::vector<double> c2;

  double eval(const std::vector<const std::vector<double>*>& levels, std::size_t i) const {
    double l1 = b1;
    double l2 = b2;
    for (std::size_t k = 0; k < c1.size(); ++k) {
      l1 += c1[k] * (*levels[k])[i];
      if (product) l2 += c2[k] * (*levels[k])[i];
    }
    return product ? std::tanh(l1) * std::tanh(l2) : std::tanh(l1);
  }
};

// Fixed battery over coordinates (W_0, ..., W_K):
//   tanh_alternating      tanh(sum_k (-1)^k x_k / (k+1))
//   tanh_last_shifted     tanh(x_K + 0.5)
//   tanh_last_by_first    tanh(x_K) tanh(x_0 + 0.5 x_{K-1})
//   tanh_mean_by_step     tanh(0.3 + 0.5 sum_k x_k) tanh(x_K - 0.5 x_{K-1} - 0.2)
std::vector<PsiSpec> psi_battery(std::size_t depth) {
  const std::size_t d = depth + 1;
  std::vector<PsiSpec> out;

  PsiSpec alt{"tanh_alternating", 0.0, std::vector<double>(d, 0.0), false, 0.0, {}};
  for (std::size_t k = 0; k < d; ++k) alt.c1[k] = (k % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(k + 1);
  out.push_back(alt);

  PsiSpec last{"tanh_last_shifted", 0.5, std::vector<double>(d, 0.0), false, 0.0, {}};
  last.c1[depth] = 1.0;
  out.push_back(last);

  PsiSpec lf{"tanh_last_by_first", 0.0, std::vector<double>(d, 0.0), true, 0.0,
             std::vector<double>(d, 0.0)};
  lf.c1[depth] = 1.0;
  lf.c2[0] += 1.0;
  lf.c2[depth - 1] += 0.5;
  out.push_back(lf);

  PsiSpec ms{"tanh_mean_by_step", 0.3, std::vector<double>(d, 0.5), true, -0.2,
             std::vector<double>(d, 0.0)};
  ms.c2[depth] += 1.0;
  ms.c2[depth - 1] -= 0.5;
  out.push_back(ms);
  return out;
}

// E psi(W_K, ..., W_0) with W_0 ~ atoms independent of the Gaussian block.
double psi_expectation(const PsiSpec& psi, const CovarianceTable& sigma) {
  const std::size_t d = psi.c1.size();
  auto quad_form = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t a = 1; a < d; ++a)
      for (std::size_t b = 1; b < d; ++b) acc += x[a] * y[b] * sigma.cov_w(a, b);
    return acc;
  };
  const double v1 = std::max(quad_form(psi.c1, psi.c1), 0.0);
  if (!psi.product) {
    return sigma.w0_law().expect([&](double w0) {
      const double mu = psi.b1 + psi.c1[0] * w0;
      const double sd = std::sqrt(v1);
      return expect_gaussian([&](double z) { return std::tanh(mu + sd * z); });
    });
  }
  const double v2 = std::max(quad_form(psi.c2, psi.c2), 0.0);
  double c12 = quad_form(psi.c1, psi.c2);
  // Rounding can push |c12| a hair above sqrt(v1 v2).
  const double bound = std::sqrt(v1 * v2);
  c12 = std::clamp(c12, -bound, bound);
  return sigma.w0_law().expect([&](double w0) {
    const double mu1 = psi.b1 + psi.c1[0] * w0;
    const double mu2 = psi.b2 + psi.c2[0] * w0;
    return expect_bivariate([&](double x) { return std::tanh(mu1 + x); },
                            [&](double y) { return std::tanh(mu2 + y); }, v1, v2, c12);
  });
}

EstimateCheck summarize(std::string name, const std::vector<double>& per_rep, double predicted) {
  const MeanSe ms = mean_se(per_rep);
  return {std::move(name), ms.mean, ms.se, predicted};
}

nlohmann::json scalar_json(const ScalarSolution& s) {
  return {{"q", s.q}, {"at_gap", s.at_gap}, {"q_residual", s.q_residual}};
}

nlohmann::json fit_json(const std::optional<SlopeFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope},
          {"intercept", fit->intercept},
          {"slope_se", fit->slope_se},
          {"half_width", fit->half_width},
          {"points", fit->points}};
}

nlohmann::json scaling_json(const ScalingReport& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back({{"n", p.n}, {"mean", p.mean}, {"se", p.se}});
  return {{"quantity", s.quantity},
          {"k", s.k},
          {"exact_zero", s.exact_zero},
          {"points", pts},
          {"fit", fit_json(s.fit)}};
}

nlohmann::json checks_json(const std::vector<EstimateCheck>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name},
                   {"empirical", c.empirical},
                   {"se", c.se},
                   {"predicted", c.predicted},
                   {"deviation", c.deviation()}});
  }
  return out;
}

void add_scaling_rows(CsvTable& t, const ScalingReport& s) {
  for (const auto& p : s.points) {
    t.add_row({static_cast<std::int64_t>(s.k), static_cast<std::int64_t>(p.n), p.mean, p.se,
               s.fit ? s.fit->slope : nan(), s.fit ? s.fit->half_width : nan(),
               static_cast<std::int64_t>(s.exact_zero ? 1 : 0)});
  }
}

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  model.validate();
  if (replicates < 1) config_error("replicates must be >= 1");
  if (n_list.empty()) config_error("n_list must not be empty");
  for (std::size_t n : n_list) {
    if (n < depth + 1) {
      std::ostringstream msg;
      msg << "every n must satisfy n >= K+1 (got n = " << n << ", K = " << depth << ")";
      config_error(msg.str());
    }
  }
  if (preset != "zero" && preset != "constant" && preset != "tanh" && preset != "bolthausen") {
    config_error("unknown preset '" + preset + "' (expected zero, constant, tanh or bolthausen)");
  }
  if (samples < 1) config_error("samples must be >= 1");
  (void)AtomLaw::parse(w0);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {{"beta", cfg.model.beta},
          {"h", cfg.model.h},
          {"n_list", cfg.n_list},
          {"depth", cfg.depth},
          {"replicates", cfg.replicates},
          {"base_seed", cfg.base_seed},
          {"preset", cfg.preset},
          {"tanh_gain", cfg.tanh_gain},
          {"tanh_offset", cfg.tanh_offset},
          {"constant_value", cfg.constant_value},
          {"w0", cfg.w0},
          {"samples", cfg.samples},
          {"budget", cfg.budget}};
}

ExperimentSetup make_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.preset == "bolthausen") {
    const ScalarSolution s = solve_q(cfg.model);
    return {bolthausen_seq(cfg.model, s.q), AtomLaw::constant(0.0), s};
  }
  const AtomLaw w0 = AtomLaw::parse(cfg.w0);
  if (cfg.preset == "zero") return {zero_seq(), w0, std::nullopt};
  if (cfg.preset == "constant") return {constant_seq(cfg.constant_value), w0, std::nullopt};
  return {tanh_seq(cfg.tanh_gain, cfg.tanh_offset), w0, std::nullopt};
}

// ---------------------------------------------------------------- law of large numbers

Theorem2Report theorem2_experiment(const ExperimentConfig& cfg) {
  const ExperimentSetup setup = make_setup(cfg);
  const std::size_t depth = cfg.depth;
  if (depth < 1) config_error("theorem2 needs depth >= 1");

  Theorem2Report rep{cfg, state_evolution(setup.fs, setup.w0, depth), setup.scalar, {}};
  const auto battery = psi_battery(depth);
  std::vector<double> psi_pred;
  for (const auto& psi : battery) psi_pred.push_back(psi_expectation(psi, rep.sigma));

  for (std::size_t n : cfg.n_list) {
    struct Rep {
      std::vector<double> moments;  // (a, b) with 1 <= a <= b <= K, row-major
      std::vector<double> variances;
      std::vector<double> psi;
    };
    std::vector<Rep> reps(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const DisorderMatrix a = sample_matrix(n, replicate_seed(cfg.base_seed, r));
      const std::vector<double> u0 = setup.w0.stratified_sample(n);
      const CavityRun run = cavity_run(a, u0, setup.fs, depth, cfg.budget);
      const auto& w = run.trace.levels;
      Rep out;
      const double nd = static_cast<double>(n);
      for (std::size_t x = 1; x <= depth; ++x) {
        for (std::size_t y = x; y <= depth; ++y) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) acc += w[x][i] * w[y][i];
          out.moments.push_back(acc / nd);
        }
        double mean = 0.0;
        for (double v : w[x]) mean += v;
        mean /= nd;
        double var = 0.0;
        for (double v : w[x]) var += (v - mean) * (v - mean);
        out.variances.push_back(var / nd);
      }
      std::vector<const std::vector<double>*> levels;
      for (const auto& l : w) levels.push_back(&l);
      for (const auto& psi : battery) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += psi.eval(levels, i);
        out.psi.push_back(acc / nd);
      }
      reps[r] = std::move(out);
    });

    Theorem2Point pt;
    pt.n = n;
    std::size_t idx = 0;
    for (std::size_t x = 1; x <= depth; ++x) {
      for (std::size_t y = x; y <= depth; ++y, ++idx) {
        std::vector<double> vals;
        for (const auto& r : reps) vals.push_back(r.moments[idx]);
        pt.moments.push_back(summarize("w" + std::to_string(x) + "*w" + std::to_string(y), vals,
                                       rep.sigma.cov_w(x, y)));
      }
      std::vector<double> vals;
      for (const auto& r : reps) vals.push_back(r.variances[x - 1]);
      pt.variances.push_back(summarize("var w" + std::to_string(x), vals, rep.sigma.cov_w(x, x)));
    }
    for (std::size_t b = 0; b < battery.size(); ++b) {
      std::vector<double> vals;
      for (const auto& r : reps) vals.push_back(r.psi[b]);
      pt.psi.push_back(summarize(battery[b].name, vals, psi_pred[b]));
    }
    for (const auto& c : pt.moments)
      pt.max_moment_deviation = std::max(pt.max_moment_deviation, std::abs(c.deviation()));
    for (const auto& c : pt.psi)
      pt.max_psi_deviation = std::max(pt.max_psi_deviation, std::abs(c.deviation()));
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

// ---------------------------------------------------------------- AMP-cavity scaling

Theorem3Report theorem3_experiment(const ExperimentConfig& cfg) {
  const ExperimentSetup setup = make_setup(cfg);
  const std::size_t depth = cfg.depth;
  std::vector<std::vector<std::vector<double>>> dist(
      depth + 1, std::vector<std::vector<double>>(cfg.n_list.size()));

  for (std::size_t idx = 0; idx < cfg.n_list.size(); ++idx) {
    const std::size_t n = cfg.n_list[idx];
    std::vector<std::vector<double>> reps(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const DisorderMatrix a = sample_matrix(n, replicate_seed(cfg.base_seed, r));
      const std::vector<double> u0 = setup.w0.stratified_sample(n);
      std::vector<double> d(depth + 1, 0.0);
      if (depth >= 1) {
        const IterTrace u = amp_run(a, u0, setup.fs, depth);
        const CavityRun w = cavity_run(a, u0, setup.fs, depth, cfg.budget);
        for (std::size_t k = 0; k <= depth; ++k) d[k] = squared_distance(u[k], w.trace[k]);
      }
      reps[r] = std::move(d);
    });
    for (std::size_t k = 0; k <= depth; ++k)
      for (const auto& r : reps) dist[k][idx].push_back(r[k]);
  }

  Theorem3Report rep{cfg, {}};
  for (std::size_t k = 0; k <= depth; ++k) {
    ScalingReport s = make_scaling("amp_cavity_sq_distance", k, cfg.n_list, dist[k]);
    if (k <= 1 && !s.exact_zero) {
      throw ConsistencyError("theorem3: AMP and cavity iterates differ at level " +
                             std::to_string(k) + ", where they must coincide exactly");
    }
    rep.per_k.push_back(std::move(s));
  }
  return rep;
}

// ---------------------------------------------------------------- stability

StabilityReport stability_experiment(const ExperimentConfig& cfg) {
  const ExperimentSetup setup = make_setup(cfg);
  const std::size_t k = cfg.depth;
  if (k > 3) config_error("stability needs depth <= 3");
  for (std::size_t n : cfg.n_list) {
    if (n < k + 5) config_error("stability needs n >= K+5 so that |S| = 2 subsets fit");
  }

  std::vector<std::vector<double>> per_n(cfg.n_list.size());
  double closed_err = 0.0;
  for (std::size_t idx = 0; idx < cfg.n_list.size(); ++idx) {
    const std::size_t n = cfg.n_list[idx];
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> reps(cfg.replicates);
    std::vector<double> errs(cfg.replicates, 0.0);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const std::uint64_t seed = replicate_seed(cfg.base_seed, r);
      const DisorderMatrix a = sample_matrix(n, seed);
      const std::vector<double> u0 = setup.w0.stratified_sample(n);
      CavityTable table(a, u0, setup.fs, k, cfg.budget);
      CounterRng rng(hash_combine(seed, kStabilityStream));
      double acc = 0.0;
      double err = 0.0;
      for (std::size_t t = 0; t < cfg.samples; ++t) {
        const std::size_t sz = t % 3;
        const auto pick = draw_distinct(rng, n, sz + 2);
        const std::size_t i = pick[0];
        const std::size_t ip = pick[1];
        const IndexSet s(std::vector<std::size_t>(pick.begin() + 2, pick.end()));
        const double diff = table.value(s, i, k) - table.value(s.with(ip), i, k);
        acc += diff * diff;
        if (k == 0) err = std::max(err, std::abs(diff));
        if (k == 1) {
          err = std::max(err, std::abs(diff - a(i, ip) * setup.fs(0, u0[ip]) * inv_sqrt_n));
        }
      }
      reps[r] = acc / static_cast<double>(cfg.samples);
      errs[r] = err;
    });
    per_n[idx] = reps;
    for (double e : errs) closed_err = std::max(closed_err, e);
  }

  StabilityReport rep{cfg, make_scaling("subset_sq_difference", k, cfg.n_list, per_n),
                      std::nullopt};
  if (k <= 1) rep.closed_form_max_error = closed_err;
  return rep;
}

// ---------------------------------------------------------------- Bolthausen vs Gibbs

Theorem4Report theorem4_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require_enumerable(cfg, "theorem4");
  const std::size_t depth = cfg.depth;
  if (depth < 1) config_error("theorem4 needs depth >= 1");
  const ModelParams p = cfg.model;
  const ScalarSolution s = solve_q(p);
  Theorem4Report rep{cfg, s, big_q(p, s.q), s.at_gap >= 1.0, {}};
  const auto orbit = iterate_delta(p, s.q, rep.big_q, depth);

  for (std::size_t n : cfg.n_list) {
    std::vector<std::vector<double>> reps(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const DisorderMatrix a = sample_matrix(n, replicate_seed(cfg.base_seed, r));
      const GibbsSummary g = exact_gibbs(a, p, {}, {.pair_correlations = false});
      const BolthausenRun run = bolthausen_run(a, p, s.q, depth);
      std::vector<double> d(depth + 1);
      for (std::size_t k = 0; k <= depth; ++k) d[k] = squared_distance(g.magnetizations, run.m[k]);
      reps[r] = std::move(d);
    });
    Theorem4Point pt;
    pt.n = n;
    for (std::size_t k = 0; k <= depth; ++k) {
      std::vector<double> vals;
      for (const auto& r : reps) vals.push_back(r[k]);
      const MeanSe ms = mean_se(vals);
      DistanceRow row{k, ms.mean, ms.se, std::nullopt};
      if (k >= 2) row.theory = 2.0 * s.q - 2.0 * orbit[k - 1];
      pt.rows.push_back(row);
    }
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

// ---------------------------------------------------------------- cavity overlaps

OverlapTriple overlap_triple(const GibbsSummary& g, CavityTable& table, const FunctionSeq& fs,
                             std::size_t k) {
  OverlapTriple t;
  for (std::size_t x = 0; x < g.sites.size(); ++x) {
    const double sig = g.magnetizations[x];
    const double nu = fs(k, table.value(g.excluded, g.sites[x], k));
    t.d += sig * sig;
    t.e += nu * nu;
    t.r += sig * nu;
  }
  const double nd = static_cast<double>(g.n_full);
  t.d /= nd;
  t.e /= nd;
  t.r /= nd;
  const double denom = std::sqrt(t.d * t.e);
  t.rho = denom > 0.0 ? t.r / denom : 0.0;
  return t;
}

Proposition6Report proposition6_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require_enumerable(cfg, "prop6");
  const std::size_t k = cfg.depth;
  if (k < 1) config_error("prop6 needs depth >= 1");
  const ModelParams p = cfg.model;
  const ScalarSolution s = solve_q(p);
  const FunctionSeq fs = bolthausen_seq(p, s.q);
  const double q_big = big_q(p, s.q);
  const auto orbit = iterate_delta(p, s.q, q_big, k - 1);
  Proposition6Report rep{cfg, s, q_big, orbit.back(), {}};

  for (std::size_t n : cfg.n_list) {
    struct Rep {
      OverlapTriple empty;
      std::vector<OverlapTriple> singles;
    };
    std::vector<Rep> reps(cfg.replicates);
    const std::size_t singles = std::min(cfg.samples, n);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const std::uint64_t seed = replicate_seed(cfg.base_seed, r);
      const DisorderMatrix a = sample_matrix(n, seed);
      GibbsCache gibbs(a, p);
      CavityTable table(a, std::vector<double>(n, 0.0), fs, k, cfg.budget);
      Rep out;
      out.empty = overlap_triple(gibbs.get({}), table, fs, k);
      CounterRng rng(hash_combine(seed, kSubsetStream));
      for (std::size_t site : draw_distinct(rng, n, singles)) {
        out.singles.push_back(overlap_triple(gibbs.get({site}), table, fs, k));
      }
      reps[r] = std::move(out);
    });

    auto summarize_triples = [&](std::string label, const std::vector<OverlapTriple>& ts) {
      OverlapSummary o;
      o.subsets = std::move(label);
      o.count = ts.size();
      std::vector<double> rs;
      for (const auto& t : ts) {
        o.mean_d += t.d;
        o.mean_e += t.e;
        o.mean_r += t.r;
        o.mean_rho += t.rho;
        o.msd_d += (t.d - s.q) * (t.d - s.q);
        o.msd_e += (t.e - s.q) * (t.e - s.q);
        o.msd_r += (t.r - rep.r_target) * (t.r - rep.r_target);
        o.max_abs_rho = std::max(o.max_abs_rho, std::abs(t.rho));
        rs.push_back(t.r);
      }
      const double c = static_cast<double>(std::max<std::size_t>(ts.size(), 1));
      o.mean_d /= c;
      o.mean_e /= c;
      o.mean_r /= c;
      o.mean_rho /= c;
      o.msd_d /= c;
      o.msd_e /= c;
      o.msd_r /= c;
      o.se_r = mean_se(rs).se;
      return o;
    };

    std::vector<OverlapTriple> empties;
    std::vector<OverlapTriple> ones;
    for (const auto& r : reps) {
      empties.push_back(r.empty);
      ones.insert(ones.end(), r.singles.begin(), r.singles.end());
    }
    Proposition6Point pt;
    pt.n = n;
    pt.summaries.push_back(summarize_triples("empty", empties));
    pt.summaries.push_back(summarize_triples("singleton", ones));
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

// ---------------------------------------------------------------- free energy / TAP

FreeEnergyReport free_energy_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require_enumerable(cfg, "free energy");
  const ScalarSolution s = solve_q(cfg.model);
  FreeEnergyReport rep{cfg, s.q, rs_free_energy(cfg.model, s.q), {}};
  for (std::size_t n : cfg.n_list) {
    std::vector<double> vals(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const DisorderMatrix a = sample_matrix(n, replicate_seed(cfg.base_seed, r));
      vals[r] = free_energy_check(a, cfg.model, s.q).finite_n;
    });
    const MeanSe ms = mean_se(vals);
    rep.points.push_back({n, ms.mean, ms.se});
  }
  return rep;
}

std::vector<double> tap_residual_diagnostic(const DisorderMatrix& a, const ModelParams& p,
                                            const GibbsSummary& g) {
  if (!g.excluded.empty()) throw DomainError("tap_residual_diagnostic: needs the full system");
  return tap_residual(a, p, g.magnetizations);
}

double rms(std::span<const double> xs) { return std::sqrt(sq_norm(xs)); }

// ---------------------------------------------------------------- serialization

nlohmann::json to_json(const Theorem2Report& r) {
  nlohmann::json sigma = nlohmann::json::array();
  for (std::size_t a = 0; a < r.sigma.depth(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t b = 0; b < r.sigma.depth(); ++b) row.push_back(r.sigma(a, b));
    sigma.push_back(row);
  }
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"n", p.n},
                   {"moments", checks_json(p.moments)},
                   {"variances", checks_json(p.variances)},
                   {"psi", checks_json(p.psi)},
                   {"max_moment_deviation", p.max_moment_deviation},
                   {"max_psi_deviation", p.max_psi_deviation}});
  }
  nlohmann::json out = {{"sigma", sigma}, {"w0", r.sigma.w0_law().to_string()}, {"points", pts}};
  if (r.scalar) out["scalar"] = scalar_json(*r.scalar);
  return out;
}

nlohmann::json to_json(const Theorem3Report& r) {
  nlohmann::json per_k = nlohmann::json::array();
  for (const auto& s : r.per_k) per_k.push_back(scaling_json(s));
  return {{"per_k", per_k}};
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json out = {{"scaling", scaling_json(r.scaling)}};
  out["closed_form_max_error"] =
      r.closed_form_max_error ? nlohmann::json(*r.closed_form_max_error) : nlohmann::json(nullptr);
  return out;
}

nlohmann::json to_json(const Theorem4Report& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : p.rows) {
      rows.push_back({{"k", row.k},
                      {"mean", row.mean},
                      {"se", row.se},
                      {"theory", row.theory ? nlohmann::json(*row.theory) : nlohmann::json(nullptr)}});
    }
    pts.push_back({{"n", p.n}, {"rows", rows}});
  }
  return {{"scalar", scalar_json(r.scalar)},
          {"big_q", r.big_q},
          {"at_warning", r.at_warning},
          {"points", pts}};
}

nlohmann::json to_json(const Proposition6Report& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json sums = nlohmann::json::array();
    for (const auto& s : p.summaries) {
      sums.push_back({{"subsets", s.subsets},
                      {"count", s.count},
                      {"mean_d", s.mean_d},
                      {"mean_e", s.mean_e},
                      {"mean_r", s.mean_r},
                      {"se_r", s.se_r},
                      {"mean_rho", s.mean_rho},
                      {"msd_d", s.msd_d},
                      {"msd_e", s.msd_e},
                      {"msd_r", s.msd_r},
                      {"max_abs_rho", s.max_abs_rho}});
    }
    pts.push_back({{"n", p.n}, {"summaries", sums}});
  }
  return {{"scalar", scalar_json(r.scalar)},
          {"big_q", r.big_q},
          {"r_target", r.r_target},
          {"points", pts}};
}

nlohmann::json to_json(const FreeEnergyReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) pts.push_back({{"n", p.n}, {"mean", p.mean}, {"se", p.se}});
  return {{"q", r.q}, {"rs_formula", r.rs_formula}, {"points", pts}};
}

CsvTable to_csv(const Theorem2Report& r) {
  CsvTable t({"n", "group", "name", "empirical", "se", "predicted", "deviation"});
  for (const auto& p : r.points) {
    auto emit = [&](const char* group, const std::vector<EstimateCheck>& cs) {
      for (const auto& c : cs) {
        t.add_row({static_cast<std::int64_t>(p.n), std::string(group), c.name, c.empirical, c.se,
                   c.predicted, c.deviation()});
      }
    };
    emit("moment", p.moments);
    emit("variance", p.variances);
    emit("psi", p.psi);
  }
  return t;
}

CsvTable to_csv(const Theorem3Report& r) {
  CsvTable t({"k", "n", "mean", "se", "slope", "slope_half_width", "exact_zero"});
  for (const auto& s : r.per_k) add_scaling_rows(t, s);
  return t;
}

CsvTable to_csv(const StabilityReport& r) {
  CsvTable t({"k", "n", "mean", "se", "slope", "slope_half_width", "exact_zero"});
  add_scaling_rows(t, r.scaling);
  return t;
}

CsvTable to_csv(const Theorem4Report& r) {
  CsvTable t({"n", "k", "mean", "se", "theory"});
  for (const auto& p : r.points) {
    for (const auto& row : p.rows) {
      t.add_row({static_cast<std::int64_t>(p.n), static_cast<std::int64_t>(row.k), row.mean,
                 row.se, row.theory ? *row.theory : nan()});
    }
  }
  return t;
}

CsvTable to_csv(const Proposition6Report& r) {
  CsvTable t({"n", "subsets", "count", "mean_d", "mean_e", "mean_r", "se_r", "mean_rho", "msd_d",
              "msd_e", "msd_r", "max_abs_rho"});
  for (const auto& p : r.points) {
    for (const auto& s : p.summaries) {
      t.add_row({static_cast<std::int64_t>(p.n), s.subsets, static_cast<std::int64_t>(s.count),
                 s.mean_d, s.mean_e, s.mean_r, s.se_r, s.mean_rho, s.msd_d, s.msd_e, s.msd_r,
                 s.max_abs_rho});
    }
  }
  return t;
}

CsvTable to_csv(const FreeEnergyReport& r) {
  CsvTable t({"n", "mean", "se", "rs_formula"});
  for (const auto& p : r.points) {
    t.add_row({static_cast<std::int64_t>(p.n), p.mean, p.se, r.rs_formula});
  }
  return t;
}

}  // namespace sklab
