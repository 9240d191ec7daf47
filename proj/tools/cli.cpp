#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "sklab/amp.hpp"
#include "sklab/cavity.hpp"
#include "sklab/disorder.hpp"
#include "sklab/error.hpp"
#include "sklab/experiments.hpp"
#include "sklab/gibbs.hpp"
#include "sklab/report.hpp"
#include "sklab/scalar.hpp"
#include "sklab/state_evolution.hpp"

namespace sklab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Every parameter any subcommand accepts; each subcommand binds a subset.
struct Params {
  ModelParams model{1.0, 0.5};
  double tol = 1e-13;
  std::vector<double> h_list;
  std::size_t steps = 200;
  double orbit_tol = 0.0;

  std::size_t n = 100;
  std::uint64_t seed = 1;
  std::string matrix_in;
  std::string matrix_out;
  std::size_t depth = 2;
  std::size_t budget = kDefaultCavityBudget;

  std::string preset = "tanh";
  double tanh_gain = 1.0;
  double tanh_offset = 0.0;
  double constant_value = 0.5;
  std::string w0 = "0.3:0.5,0.9:0.5";

  std::vector<std::size_t> exclude;
  bool no_pairs = false;
  std::vector<double> beta_grid;

  ExperimentConfig exp;

  std::string out_dir;
  std::string format = "both";
  std::string config_file;
};

// Output files of one invocation, all stamped with the same metadata.
class Writer {
 public:
  Writer(const Params& p, std::string kind, json config, std::uint64_t seed)
      : dir_(p.out_dir), format_(p.format), kind_(std::move(kind)), config_(std::move(config)),
        seed_(seed) {}

  const json& config() const { return config_; }

  void json_file(const std::string& name, json result) {
    if (format_ == "csv") return;
    const fs::path path = dir_ / name;
    write_json(path, report_envelope(kind_, config_, seed_, std::move(result)));
    written_.push_back(path.string());
  }

  void csv_file(const std::string& name, const CsvTable& table, const json& extra = json::object()) {
    if (format_ == "json") return;
    json meta = output_metadata(config_, seed_);
    meta["kind"] = kind_;
    meta.update(extra);
    const fs::path path = dir_ / name;
    write_csv(path, table, meta);
    written_.push_back(path.string());
  }

  std::string files() const {
    std::string s;
    for (const auto& w : written_) s += (s.empty() ? "" : " ") + w;
    return s;
  }

 private:
  fs::path dir_;
  std::string format_;
  std::string kind_;
  json config_;
  std::uint64_t seed_;
  std::vector<std::string> written_;
};

std::string num(double v) { return format_double(v); }

json model_json(const ModelParams& m) { return {{"beta", m.beta}, {"h", m.h}}; }

// ---------------------------------------------------------------- option groups

void add_output(CLI::App* sub, Params& p) {
  sub->add_option("--config", p.config_file, "Parameter file (key = value lines); flags win");
  sub->add_option("--out", p.out_dir, std::string("Output directory (default: $") + kOutputDirEnv + " or .)");
  sub->add_option("--format", p.format, "Files to write")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
}

void add_model(CLI::App* sub, Params& p) {
  sub->add_option("--beta", p.model.beta, "Inverse temperature (>= 0)")->capture_default_str();
  sub->add_option("--h", p.model.h, "External field (>= 0)")->capture_default_str();
}

void add_matrix(CLI::App* sub, Params& p) {
  sub->add_option("--n", p.n, "System size")->capture_default_str();
  sub->add_option("--seed", p.seed, "Disorder seed")->capture_default_str();
  sub->add_option("--matrix", p.matrix_in, "Load the coupling matrix from a binary dump");
  sub->add_option("--dump-matrix", p.matrix_out, "Write the coupling matrix to a binary dump");
}

void add_denoiser(CLI::App* sub, Params& p) {
  sub->add_option("--preset", p.preset, "Denoisers f_k")
      ->check(CLI::IsMember({"zero", "constant", "tanh", "bolthausen"}))
      ->capture_default_str();
  sub->add_option("--tanh-gain", p.tanh_gain, "tanh preset: f_k(x) = tanh(gain x + offset)")
      ->capture_default_str();
  sub->add_option("--tanh-offset", p.tanh_offset, "tanh preset offset")->capture_default_str();
  sub->add_option("--constant", p.constant_value, "constant preset value")->capture_default_str();
  sub->add_option("--w0", p.w0, "Initial law as value:prob,... (ignored by bolthausen)")
      ->capture_default_str();
}

void add_experiment(CLI::App* sub, Params& p) {
  auto& e = p.exp;
  sub->add_option("--beta", e.model.beta, "Inverse temperature")->capture_default_str();
  sub->add_option("--h", e.model.h, "External field")->capture_default_str();
  sub->add_option("--n-list", e.n_list, "System sizes")->delimiter(',')->capture_default_str();
  sub->add_option("--depth", e.depth, "Iteration depth K")->capture_default_str();
  sub->add_option("--replicates", e.replicates, "Disorder replicates per size")->capture_default_str();
  sub->add_option("--seed", e.base_seed, "Base seed")->capture_default_str();
  sub->add_option("--preset", e.preset, "Denoisers f_k")
      ->check(CLI::IsMember({"zero", "constant", "tanh", "bolthausen"}))
      ->capture_default_str();
  sub->add_option("--tanh-gain", e.tanh_gain, "tanh preset gain")->capture_default_str();
  sub->add_option("--tanh-offset", e.tanh_offset, "tanh preset offset")->capture_default_str();
  sub->add_option("--constant", e.constant_value, "constant preset value")->capture_default_str();
  sub->add_option("--w0", e.w0, "Initial law as value:prob,...")->capture_default_str();
  sub->add_option("--samples", e.samples, "Random subset draws per replicate")->capture_default_str();
  sub->add_option("--threads", e.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sub->add_option("--budget", e.budget, "Cavity storage budget in values")->capture_default_str();
}

// ---------------------------------------------------------------- shared helpers

ExperimentConfig denoiser_config(const Params& p) {
  ExperimentConfig c;
  c.model = p.model;
  c.n_list = {std::max<std::size_t>(p.n, p.depth + 1)};
  c.depth = p.depth;
  c.preset = p.preset;
  c.tanh_gain = p.tanh_gain;
  c.tanh_offset = p.tanh_offset;
  c.constant_value = p.constant_value;
  c.w0 = p.w0;
  return c;
}

json denoiser_json(const Params& p) {
  json j = {{"preset", p.preset}};
  if (p.preset == "tanh") {
    j["tanh_gain"] = p.tanh_gain;
    j["tanh_offset"] = p.tanh_offset;
  }
  if (p.preset == "constant") j["constant"] = p.constant_value;
  if (p.preset == "bolthausen") {
    j["beta"] = p.model.beta;
    j["h"] = p.model.h;
  } else {
    j["w0"] = p.w0;
  }
  return j;
}

DisorderMatrix obtain_matrix(const Params& p) {
  DisorderMatrix a = p.matrix_in.empty() ? sample_matrix(p.n, p.seed) : load_matrix(p.matrix_in);
  if (!p.matrix_out.empty()) save_matrix(a, p.matrix_out);
  return a;
}

json matrix_json(const DisorderMatrix& a, const Params& p) {
  json j = {{"n", a.n()}, {"seed", a.seed()}};
  if (!p.matrix_in.empty()) j["matrix_file"] = p.matrix_in;
  return j;
}

// ---------------------------------------------------------------- scalar commands

void cmd_solve_q(const Params& p, std::ostream& out) {
  p.model.validate();
  SolveQOptions opt;
  opt.tol = p.tol;
  const ScalarSolution s = solve_q(p.model, opt);
  Writer w(p, "solve-q", {{"model", model_json(p.model)}, {"tol", p.tol}}, 0);
  w.json_file("solve_q.json", {{"q", s.q},
                               {"at_gap", s.at_gap},
                               {"q_residual", s.q_residual},
                               {"inside_at", s.inside_at()},
                               {"big_q", big_q(p.model, s.q)}});
  out << "q = " << num(s.q) << "  at_gap = " << num(s.at_gap) << "  residual = " << num(s.q_residual)
      << "\n";
}

// Smallest beta with at_gap = 1 at fixed h: upward scan, then bisection.
// The scan stops at beta = 6; above that the default rule under-resolves
// cosh^-4 and at_gap is no longer reliable.
std::optional<double> at_line_beta(double h) {
  constexpr double beta_max = 6.0;
  constexpr double scan_step = 0.1;
  auto gap = [h](double beta) {
    const ModelParams m{beta, h};
    return solve_q(m).at_gap;
  };
  double lo = 0.0;
  double hi = scan_step;
  while (gap(hi) < 1.0) {
    lo = hi;
    hi += scan_step;
    if (hi > beta_max + 1e-12) return std::nullopt;
  }
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void cmd_at_line(const Params& p, std::ostream& out) {
  p.model.validate();
  const std::vector<double> hs = p.h_list.empty() ? std::vector<double>{p.model.h} : p.h_list;
  Writer w(p, "at-line", {{"beta", p.model.beta}, {"h_list", hs}}, 0);
  CsvTable t({"h", "q", "at_gap", "inside_at", "beta_at"});
  json rows = json::array();
  std::string summary;
  for (double h : hs) {
    const ModelParams m{p.model.beta, h};
    m.validate();
    const ScalarSolution s = solve_q(m);
    const auto b = at_line_beta(h);
    t.add_row({h, s.q, s.at_gap, std::int64_t{s.inside_at() ? 1 : 0},
               b ? *b : std::numeric_limits<double>::quiet_NaN()});
    rows.push_back({{"h", h},
                    {"q", s.q},
                    {"at_gap", s.at_gap},
                    {"inside_at", s.inside_at()},
                    {"beta_at", b ? json(*b) : json(nullptr)}});
    if (summary.empty()) {
      summary = "at_gap = " + num(s.at_gap) + " at beta = " + num(p.model.beta) + ", h = " + num(h) +
                (s.inside_at() ? " (inside)" : " (outside)") + "; AT line at beta = " +
                (b ? num(*b) : std::string("none below 6"));
    }
  }
  w.json_file("at_line.json", {{"rows", rows}});
  w.csv_file("at_line.csv", t);
  out << summary << (hs.size() > 1 ? " (+" + std::to_string(hs.size() - 1) + " more h)" : "")
      << "\n";
}

void cmd_delta_orbit(const Params& p, std::ostream& out) {
  p.model.validate();
  if (p.steps < 1) throw DomainError("delta-orbit: --steps must be >= 1");
  const ScalarSolution s = solve_q(p.model);
  const auto orbit = delta_orbit(p.model, s.q, p.steps, p.orbit_tol);
  Writer w(p, "delta-orbit",
           {{"model", model_json(p.model)}, {"steps", p.steps}, {"tol", p.orbit_tol}}, 0);
  CsvTable t({"k", "value", "q_minus_value"});
  for (std::size_t k = 0; k < orbit.size(); ++k)
    t.add_row({static_cast<std::int64_t>(k), orbit[k], s.q - orbit[k]});
  json j = {{"q", s.q},
            {"big_q", orbit.front()},
            {"at_gap", s.at_gap},
            {"inside_at", s.inside_at()},
            {"orbit", orbit}};
  if (!s.inside_at()) j["note"] = "at_gap >= 1: convergence to q is not asserted";
  w.json_file("delta_orbit.json", j);
  w.csv_file("delta_orbit.csv", t);
  out << "orbit of length " << orbit.size() << " from Q = " << num(orbit.front()) << " to "
      << num(orbit.back()) << ", q = " << num(s.q) << (s.inside_at() ? "" : " (outside AT line)")
      << "\n";
}

void cmd_state_evolution(const Params& p, std::ostream& out) {
  if (p.depth < 1) throw DomainError("state-evolution: --depth must be >= 1");
  const ExperimentSetup setup = make_setup(denoiser_config(p));
  const CovarianceTable sigma = state_evolution(setup.fs, setup.w0, p.depth);
  json cfg = denoiser_json(p);
  cfg["depth"] = p.depth;
  Writer w(p, "state-evolution", cfg, 0);
  CsvTable t({"a", "b", "value"});
  json rows = json::array();
  for (std::size_t a = 0; a < p.depth; ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < p.depth; ++b) {
      row.push_back(sigma(a, b));
      t.add_row({static_cast<std::int64_t>(a), static_cast<std::int64_t>(b), sigma(a, b)});
    }
    rows.push_back(row);
  }
  json j = {{"sigma", rows}, {"min_eigenvalue", sigma.min_eigenvalue()}, {"w0", setup.w0.to_string()}};
  if (setup.scalar) j["q"] = setup.scalar->q;
  w.json_file("state_evolution.json", j);
  w.csv_file("state_evolution.csv", t);
  out << "sigma(" << p.depth << "x" << p.depth << "): diagonal";
  for (std::size_t a = 0; a < p.depth; ++a) out << " " << num(sigma(a, a));
  out << "\n";
}

// ---------------------------------------------------------------- engines

json trace_meta(const IterTrace& tr) { return {{"sq_norms", tr.sq_norms()}}; }

constexpr const char* kNormConvention = "||x||^2 = (1/n) sum_i x_i^2";

json trace_header(const DisorderMatrix& a, std::size_t depth, const std::string& preset) {
  return {{"n", a.n()}, {"seed", a.seed()}, {"K", depth}, {"preset", preset},
          {"norm_convention", kNormConvention}};
}

void cmd_run_amp(const Params& p, std::ostream& out) {
  if (p.depth < 1) throw DomainError("run-amp: --depth must be >= 1");
  const DisorderMatrix a = obtain_matrix(p);
  ExperimentConfig c = denoiser_config(p);
  c.n_list = {a.n()};
  c.depth = std::min(p.depth, a.n() - 1);
  const ExperimentSetup setup = make_setup(c);
  const auto u0 = setup.w0.stratified_sample(a.n());
  const IterTrace tr = amp_run(a, u0, setup.fs, p.depth);
  json cfg = denoiser_json(p);
  cfg["matrix"] = matrix_json(a, p);
  cfg["depth"] = p.depth;
  cfg["norm_convention"] = kNormConvention;
  Writer w(p, "run-amp", cfg, a.seed());
  w.json_file("amp.json", trace_meta(tr));
  w.csv_file("amp_trace.csv", trace_table(tr), trace_header(a, p.depth, p.preset));
  out << "AMP n = " << a.n() << ", K = " << p.depth << ": ||u^K||^2 = " << num(tr.sq_norms().back())
      << "\n";
}

void cmd_run_bolthausen(const Params& p, std::ostream& out) {
  p.model.validate();
  if (p.depth < 1) throw DomainError("run-bolthausen: --depth must be >= 1");
  const DisorderMatrix a = obtain_matrix(p);
  const ScalarSolution s = solve_q(p.model);
  const BolthausenRun run = bolthausen_run(a, p.model, s.q, p.depth);
  json cfg = {{"model", model_json(p.model)},
              {"matrix", matrix_json(a, p)},
              {"depth", p.depth},
              {"norm_convention", kNormConvention}};
  Writer w(p, "run-bolthausen", cfg, a.seed());
  json j = trace_meta(run.m);
  j["q"] = s.q;
  j["at_gap"] = s.at_gap;
  j["identity_deviation"] = run.identity_deviation;
  w.json_file("bolthausen.json", j);
  w.csv_file("bolthausen_trace.csv", trace_table(run.m), trace_header(a, p.depth, "bolthausen"));
  const double dev = *std::max_element(run.identity_deviation.begin(), run.identity_deviation.end());
  out << "Bolthausen n = " << a.n() << ", K = " << p.depth << ": max |m - f(u)| = " << num(dev)
      << ", ||m^K||^2 = " << num(run.m.sq_norms().back()) << "\n";
}

void cmd_run_cavity(const Params& p, std::ostream& out) {
  const DisorderMatrix a = obtain_matrix(p);
  if (a.n() < p.depth + 1) {
    throw DomainError("run-cavity: requires n >= K+1 (got n = " + std::to_string(a.n()) +
                      ", K = " + std::to_string(p.depth) + ")");
  }
  ExperimentConfig c = denoiser_config(p);
  c.n_list = {a.n()};
  const ExperimentSetup setup = make_setup(c);
  const auto u0 = setup.w0.stratified_sample(a.n());
  const CavityRun run = cavity_run(a, u0, setup.fs, p.depth, p.budget);
  json cfg = denoiser_json(p);
  cfg["matrix"] = matrix_json(a, p);
  cfg["depth"] = p.depth;
  cfg["budget"] = p.budget;
  Writer w(p, "run-cavity", cfg, a.seed());
  json levels = json::array();
  for (std::size_t k = 0; k <= p.depth; ++k) {
    levels.push_back({{"k", k},
                      {"closed_form", run.table.is_closed_form(k)},
                      {"stored_subset_size", run.table.stored_subset_size(k)}});
  }
  json j = trace_meta(run.trace);
  j["stored_values"] = run.table.stored_values();
  j["levels"] = levels;
  w.json_file("cavity.json", j);
  w.csv_file("cavity_trace.csv", trace_table(run.trace), trace_header(a, p.depth, p.preset));
  out << "cavity n = " << a.n() << ", K = " << p.depth << ": " << run.table.stored_values()
      << " stored values, ||w^K||^2 = " << num(run.trace.sq_norms().back()) << "\n";
}

// ---------------------------------------------------------------- Gibbs

void cmd_gibbs(const Params& p, std::ostream& out) {
  p.model.validate();
  const DisorderMatrix a = obtain_matrix(p);
  for (auto i : p.exclude)
    if (i >= a.n()) throw DomainError("gibbs: excluded index " + std::to_string(i) + " >= n");
  const IndexSet s(p.exclude);
  const bool pairs = !p.no_pairs;
  const GibbsSummary g = exact_gibbs(a, p.model, s, {.pair_correlations = pairs});
  const ScalarSolution sol = solve_q(p.model);
  json cfg = {{"model", model_json(p.model)},
              {"matrix", matrix_json(a, p)},
              {"exclude", std::vector<std::size_t>(s.begin(), s.end())},
              {"pairs", pairs},
              {"beta_grid", p.beta_grid}};
  Writer w(p, "gibbs", cfg, a.seed());
  json j = {{"sites", g.sites},
            {"magnetizations", g.magnetizations},
            {"log_z", g.log_z},
            {"min_energy", g.min_energy},
            {"n_eff", g.n_eff()},
            {"q", sol.q},
            {"at_gap", sol.at_gap}};
  if (s.empty()) {
    j["free_energy"] = {{"finite_n", g.log_z / static_cast<double>(a.n())},
                        {"rs_formula", rs_free_energy(p.model, sol.q)}};
  }
  if (pairs) {
    const OverlapMoments m = overlap_moments(g, sol.q);
    j["overlap"] = {{"mean_r", m.mean_r}, {"second_r", m.second_r}, {"concentration", m.concentration}};
    j["pair_corr"] = g.pair_corr;
  }
  // Overlap concentration at finitely many beta' (grid diagnostic only).
  json grid = json::array();
  for (double bp : p.beta_grid) {
    const ModelParams mp{bp, p.model.h};
    mp.validate();
    const double qp = solve_q(mp).q;
    const OverlapMoments m = overlap_moments(exact_gibbs(a, mp, s), qp);
    grid.push_back({{"beta", bp}, {"q", qp}, {"concentration", m.concentration}});
  }
  if (!p.beta_grid.empty()) j["concentration_grid"] = grid;
  w.json_file("gibbs.json", j);
  CsvTable t({"i", "magnetization"});
  for (std::size_t x = 0; x < g.n_eff(); ++x)
    t.add_row({static_cast<std::int64_t>(g.sites[x]), g.magnetizations[x]});
  w.csv_file("gibbs.csv", t);
  out << "exact Gibbs over " << g.n_eff() << " spins: log Z = " << num(g.log_z) << "\n";
}

void cmd_tap_residual(const Params& p, std::ostream& out) {
  p.model.validate();
  const DisorderMatrix a = obtain_matrix(p);
  const GibbsSummary g = exact_gibbs(a, p.model, {}, {.pair_correlations = false});
  const auto r = tap_residual_diagnostic(a, p.model, g);
  Writer w(p, "tap-residual", {{"model", model_json(p.model)}, {"matrix", matrix_json(a, p)}},
           a.seed());
  w.json_file("tap_residual.json", {{"residual", r}, {"rms", rms(r)}});
  CsvTable t({"i", "magnetization", "residual"});
  for (std::size_t i = 0; i < a.n(); ++i)
    t.add_row({static_cast<std::int64_t>(i), g.magnetizations[i], r[i]});
  w.csv_file("tap_residual.csv", t);
  out << "TAP residual at exact magnetizations, n = " << a.n() << ": rms = " << num(rms(r)) << "\n";
}

// ---------------------------------------------------------------- experiments

template <class Report>
void emit_experiment(const Params& p, const std::string& kind, const std::string& stem,
                     const std::string& csv_name, const Report& r) {
  Writer w(p, kind, to_json(p.exp), p.exp.base_seed);
  w.json_file(stem + ".json", to_json(r));
  w.csv_file(csv_name, to_csv(r));
}

std::string slope_text(const ScalingReport& s) {
  if (s.exact_zero) return "exactly zero";
  if (!s.fit) return "no fit";
  return "slope " + num(s.fit->slope) + " +/- " + num(s.fit->half_width);
}

void cmd_theorem2(const Params& p, std::ostream& out) {
  const auto r = theorem2_experiment(p.exp);
  emit_experiment(p, "exp-theorem2", "theorem2", "theorem2.csv", r);
  double dm = 0.0;
  double dp = 0.0;
  for (const auto& pt : r.points) {
    dm = std::max(dm, pt.max_moment_deviation);
    dp = std::max(dp, pt.max_psi_deviation);
  }
  out << "theorem2: max |moment deviation| = " << num(dm) << ", max |psi deviation| = " << num(dp)
      << "\n";
}

void cmd_theorem3(const Params& p, std::ostream& out) {
  const auto r = theorem3_experiment(p.exp);
  emit_experiment(p, "exp-theorem3", "theorem3", "scaling.csv", r);
  out << "theorem3: k = " << r.per_k.back().k << " " << slope_text(r.per_k.back()) << "\n";
}

void cmd_stability(const Params& p, std::ostream& out) {
  const auto r = stability_experiment(p.exp);
  emit_experiment(p, "exp-stability", "stability", "stability.csv", r);
  out << "stability: k = " << r.scaling.k << " " << slope_text(r.scaling);
  if (r.closed_form_max_error) out << ", closed-form error " << num(*r.closed_form_max_error);
  out << "\n";
}

void cmd_theorem4(const Params& p, std::ostream& out) {
  const auto r = theorem4_experiment(p.exp);
  emit_experiment(p, "exp-theorem4", "theorem4", "theorem4.csv", r);
  const auto& rows = r.points.back().rows;
  out << "theorem4: n = " << r.points.back().n << ", distance at k = " << rows.back().k << " is "
      << num(rows.back().mean) << (r.at_warning ? " (warning: at_gap >= 1)" : "") << "\n";
}

void cmd_prop6(const Params& p, std::ostream& out) {
  const auto r = proposition6_experiment(p.exp);
  emit_experiment(p, "exp-prop6", "prop6", "prop6.csv", r);
  const auto& s = r.points.back().summaries.front();
  out << "prop6: R_empty = " << num(s.mean_r) << " (target " << num(r.r_target) << "), D = "
      << num(s.mean_d) << ", q = " << num(r.scalar.q) << "\n";
}

void cmd_free_energy(const Params& p, std::ostream& out) {
  const auto r = free_energy_experiment(p.exp);
  emit_experiment(p, "exp-free-energy", "free_energy", "free_energy.csv", r);
  out << "free energy: n = " << r.points.back().n << " mean " << num(r.points.back().mean)
      << " vs RS " << num(r.rs_formula) << "\n";
}

// ---------------------------------------------------------------- config files

bool is_flag_token(const std::string& s) { return s.size() > 2 && s.rfind("--", 0) == 0; }

std::string flag_name(const std::string& token) {
  const auto eq = token.find('=');
  return token.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

// Turns the --config file of the chosen subcommand into flags placed ahead of
// the user's own, skipping keys the user also passed.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& sub) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (!is_flag_token(args[i])) continue;
    const std::string name = flag_name(args[i]);
    given.insert(name);
    if (name == "config") {
      const auto eq = args[i].find('=');
      if (eq != std::string::npos) {
        path = args[i].substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file " + path);
  const auto items = CLI::ConfigTOML().from_config(in);

  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name())) {
      throw DomainError("config file " + path + ": section '" + item.parents[0] +
                        "' does not match subcommand '" + sub.get_name() + "'");
    }
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (key == "config" || key == "help" || opt == nullptr) {
      throw DomainError("config file " + path + ": unknown key '" + item.name + "' for " +
                        sub.get_name());
    }
    if (given.count(key)) continue;
    if (opt->get_type_size() == 0) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      extra.push_back("--" + key + "=" + v);
      continue;
    }
    extra.push_back("--" + key);
    for (const auto& v : item.inputs) extra.push_back(v);
  }
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Params p;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) p.out_dir = env;
  if (p.out_dir.empty()) p.out_dir = ".";

  CLI::App app{"sklab: cavity, AMP and TAP iterations for the SK model"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::map<std::string, std::function<void(const Params&, std::ostream&)>> handlers;
  auto command = [&](const std::string& name, const std::string& help, auto&& bind,
                     std::function<void(const Params&, std::ostream&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    bind(sub);
    add_output(sub, p);
    handlers[name] = std::move(fn);
    return sub;
  };

  command("solve-q", "Solve q = E tanh^2(beta z sqrt(q) + h) and the AT gap",
          [&](CLI::App* s) {
            add_model(s, p);
            s->add_option("--tol", p.tol, "Residual tolerance")->capture_default_str();
          },
          cmd_solve_q);
  command("at-line", "AT gap at (beta, h) and the AT-line temperature for each h",
          [&](CLI::App* s) {
            add_model(s, p);
            s->add_option("--h-list", p.h_list, "Several fields at once")->delimiter(',');
          },
          cmd_at_line);
  command("delta-orbit", "Orbit Q, Delta(Q), Delta(Delta(Q)), ...",
          [&](CLI::App* s) {
            add_model(s, p);
            s->add_option("--steps", p.steps, "Maximum number of Delta steps")->capture_default_str();
            s->add_option("--tol", p.orbit_tol, "Stop when a step is below tol")->capture_default_str();
          },
          cmd_delta_orbit);
  command("state-evolution", "Covariance E W_{a+1} W_{b+1} of the Gaussian limit",
          [&](CLI::App* s) {
            add_model(s, p);
            add_denoiser(s, p);
            s->add_option("--depth", p.depth, "Number of Gaussian coordinates")->capture_default_str();
          },
          cmd_state_evolution);
  command("run-amp", "AMP iteration on one disorder sample",
          [&](CLI::App* s) {
            add_model(s, p);
            add_matrix(s, p);
            add_denoiser(s, p);
            s->add_option("--depth", p.depth, "Iteration depth K")->capture_default_str();
          },
          cmd_run_amp);
  command("run-bolthausen", "Bolthausen's TAP iteration on one disorder sample",
          [&](CLI::App* s) {
            add_model(s, p);
            add_matrix(s, p);
            s->add_option("--depth", p.depth, "Iteration depth K")->capture_default_str();
          },
          cmd_run_bolthausen);
  command("run-cavity", "Cavity iteration over self-avoiding index subsets",
          [&](CLI::App* s) {
            add_model(s, p);
            add_matrix(s, p);
            add_denoiser(s, p);
            s->add_option("--depth", p.depth, "Iteration depth K")->capture_default_str();
            s->add_option("--budget", p.budget, "Storage budget in values")->capture_default_str();
          },
          cmd_run_cavity);
  command("gibbs", "Exact Gibbs averages by enumeration (n - |S| <= 24)",
          [&](CLI::App* s) {
            add_model(s, p);
            add_matrix(s, p);
            s->add_option("--exclude", p.exclude, "Excluded sites S (0-based)")->delimiter(',');
            s->add_flag("--no-pairs", p.no_pairs, "Skip pair correlations and overlap moments");
            s->add_option("--beta-grid", p.beta_grid, "Overlap concentration at these beta'")
                ->delimiter(',');
          },
          cmd_gibbs);
  command("tap-residual", "TAP residual at the exact magnetizations",
          [&](CLI::App* s) {
            add_model(s, p);
            add_matrix(s, p);
          },
          cmd_tap_residual);
  const auto exp_opts = [&](CLI::App* s) { add_experiment(s, p); };
  command("exp-theorem2", "Empirical moments and test functions vs state evolution", exp_opts,
          cmd_theorem2);
  command("exp-theorem3", "AMP-cavity distance scaling in n", exp_opts, cmd_theorem3);
  command("exp-theorem4", "Bolthausen iterates vs exact magnetizations", exp_opts, cmd_theorem4);
  command("exp-stability", "Subset stability of cavity values", exp_opts, cmd_stability);
  command("exp-prop6", "Overlaps D_S, E_S^k, R_S^k against their limits", exp_opts, cmd_prop6);
  command("exp-free-energy", "Finite-n free energy vs the replica-symmetric formula", exp_opts,
          cmd_free_energy);

  std::vector<std::string> argv = args;
  try {
    if (!argv.empty() && !argv.front().empty() && argv.front()[0] != '-') {
      if (CLI::App* sub = app.get_subcommand_no_throw(argv.front())) argv = expand_config(argv, *sub);
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    handlers.at(chosen->get_name())(p, out);
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace sklab::cli
