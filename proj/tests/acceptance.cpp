// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sklab/amp.hpp"
#include "sklab/cavity.hpp"
#include "sklab/disorder.hpp"
#include "sklab/experiments.hpp"
#include "sklab/function_seq.hpp"
#include "sklab/report.hpp"
#include "sklab/rng.hpp"
#include "sklab/scalar.hpp"

using namespace sklab;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool ok = out.ok && in_time;
  if (!ok) ++failures;
  std::printf("%s %2d %s: %s; %.2fs (limit %.0fs)%s\n", ok ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs, limit_s, in_time ? "" : " [over time]");
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome scalar_grid() {
  double worst = 0.0;
  for (double beta : {0.2, 0.5, 1.0, 1.5}) {
    for (double h : {0.2, 0.5, 1.0}) {
      const ModelParams p{beta, h};
      const ScalarSolution s = solve_q(p);
      worst = std::max(worst, std::abs(s.q - q_map(s.q, p)));
    }
  }
  double worst0 = 0.0;
  for (double h : {0.2, 0.5, 1.0}) {
    const double t = std::tanh(h);
    worst0 = std::max(worst0, std::abs(solve_q({0.0, h}).q - t * t));
  }
  return {worst < 1e-12 && worst0 < 1e-12,
          "max residual " + fmt(worst) + ", beta=0 error " + fmt(worst0)};
}

Outcome delta_orbit_convergence() {
  const ModelParams p{1.0, 0.5};
  const ScalarSolution s = solve_q(p);
  if (!s.inside_at()) return {false, "at_gap " + fmt(s.at_gap) + " >= 1"};
  std::vector<double> orbit{big_q(p, s.q)};
  for (int k = 0; k < 200; ++k) orbit.push_back(delta_map(orbit.back(), p, s.q).value);
  // Strict increase is required until the orbit is stationary in floating
  // point (steps below 1e-14); from then on it must stay put.
  std::size_t reached = orbit.size() - 1;
  bool increasing = true;
  for (std::size_t k = 1; k < orbit.size(); ++k) {
    const double step = orbit[k] - orbit[k - 1];
    if (reached == orbit.size() - 1) {
      if (std::abs(step) < 1e-14) {
        reached = k - 1;
      } else if (step <= 0.0) {
        increasing = false;
      }
    } else if (std::abs(step) >= 1e-14) {
      increasing = false;
    }
  }
  const double err = std::abs(orbit[200] - s.q);
  return {increasing && err < 1e-6,
          "at_gap " + fmt(s.at_gap) + ", strictly increasing for " + std::to_string(reached) +
              " steps, |D^200(Q) - q| = " + fmt(err)};
}

Outcome cavity_oracle() {
  const FunctionSeq fs = tanh_seq();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DisorderMatrix a = sample_matrix(8, seed);
    CounterRng rng(hash_combine(seed, 77));
    std::vector<double> u(8);
    for (auto& v : u) v = 0.5 * rng.normal();
    const auto w = cavity_run(a, u, fs, 3).trace[3];
    const auto ref = oracle::cavity_depth3(a, u, [](std::size_t, double x) { return std::tanh(x); });
    for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, std::abs(w[i] - ref[i]));
  }
  return {worst < 1e-13, "max |w3 - path sum| over 10 seeds " + fmt(worst)};
}

Outcome amp_bolthausen() {
  const ModelParams p{1.0, 0.5};
  const double q = solve_q(p).q;
  const DisorderMatrix a = sample_matrix(400, 2024);
  const BolthausenRun run = bolthausen_run(a, p, q, 8);
  const IterTrace u = amp_run(a, std::vector<double>(400, 0.0), bolthausen_seq(p, q), 8);
  double worst = 0.0;
  for (std::size_t k = 2; k <= 8; ++k)
    for (std::size_t i = 0; i < 400; ++i)
      worst = std::max(worst, std::abs(run.m[k][i] - std::tanh(p.beta * u[k][i] + p.h)));
  return {worst < 1e-10, "max |m - tanh(beta u + h)| for k=2..8: " + fmt(worst)};
}

Outcome theorem3() {
  ExperimentConfig cfg;
  cfg.preset = "tanh";
  cfg.depth = 2;
  cfg.n_list = {50, 100, 200, 400};
  cfg.replicates = 20;
  const Theorem3Report r = theorem3_experiment(cfg);
  const auto& s = r.per_k[2];
  const bool zero = r.per_k[0].exact_zero && r.per_k[1].exact_zero;
  const double slope = s.fit ? s.fit->slope : NAN;
  return {zero && s.fit && slope >= -1.35 && slope <= -0.65,
          "k=2 slope " + fmt(slope) + " +/- " + fmt(s.fit ? s.fit->half_width : NAN) +
              ", k<=1 exactly zero: " + (zero ? "yes" : "no")};
}

Outcome theorem2() {
  ExperimentConfig cfg;
  cfg.model = {1.0, 0.5};
  cfg.preset = "bolthausen";
  cfg.depth = 3;
  cfg.n_list = {2000};
  cfg.replicates = 20;
  const Theorem2Report b = theorem2_experiment(cfg);
  const double q = b.scalar->q;
  double worst_rel = 0.0;
  for (std::size_t k = 2; k <= 3; ++k)
    worst_rel = std::max(worst_rel, std::abs(b.points[0].variances[k - 1].empirical - q) / q);

  ExperimentConfig gen;
  gen.preset = "tanh";
  gen.tanh_offset = 0.3;
  gen.depth = 2;
  gen.n_list = {2000};
  gen.replicates = 20;
  const Theorem2Report g = theorem2_experiment(gen);
  const EstimateCheck* cross = nullptr;
  for (const auto& c : g.points[0].moments)
    if (c.name == "w1*w2") cross = &c;
  const double z = std::abs(cross->deviation()) / cross->se;
  return {worst_rel < 0.05 && z < 3.0,
          "bolthausen max |Var(w^k)/q - 1| (k=2,3) " + fmt(worst_rel) + "; tanh w1*w2 " +
              fmt(cross->empirical) + " vs " + fmt(cross->predicted) + " (" + fmt(z) + " se)"};
}

Outcome theorem4() {
  ExperimentConfig cfg;
  cfg.model = {0.25, 0.4};
  cfg.depth = 6;
  cfg.n_list = {14};
  cfg.replicates = 100;
  const Theorem4Report r = theorem4_experiment(cfg);
  const auto& rows = r.points[0].rows;
  bool monotone = true;
  std::ostringstream curve;
  for (std::size_t k = 2; k <= 6; ++k) {
    curve << (k > 2 ? " " : "") << fmt(rows[k].mean);
    if (k > 2 && rows[k].mean > rows[k - 1].mean + rows[k].se) monotone = false;
  }
  const double gap = rows[2].mean - rows[6].mean;
  const double se_gap = std::hypot(rows[2].se, rows[6].se);
  return {monotone && gap > 2.0 * se_gap,
          "k=2..6 means [" + curve.str() + "], k=2 minus k=6 " + fmt(gap) + " (" +
              fmt(gap / se_gap) + " se), theory k=6 " + fmt(*rows[6].theory)};
}

Outcome stability() {
  ExperimentConfig cfg;
  cfg.preset = "tanh";
  cfg.depth = 2;
  cfg.n_list = {50, 100, 200, 400};
  cfg.replicates = 20;
  const StabilityReport r = stability_experiment(cfg);
  const double slope = r.scaling.fit ? r.scaling.fit->slope : NAN;
  double closed = 0.0;
  for (std::size_t k : {0, 1}) {
    ExperimentConfig c = cfg;
    c.depth = k;
    closed = std::max(closed, *stability_experiment(c).closed_form_max_error);
  }
  return {r.scaling.fit && slope >= -1.4 && slope <= -0.6 && closed < 1e-14,
          "k=2 slope " + fmt(slope) + " +/- " +
              fmt(r.scaling.fit ? r.scaling.fit->half_width : NAN) + ", k<=1 closed-form error " +
              fmt(closed)};
}

Outcome free_energy() {
  ExperimentConfig cfg;
  cfg.model = {0.2, 0.3};
  cfg.n_list = {16};
  cfg.replicates = 50;
  const FreeEnergyReport r = free_energy_experiment(cfg);
  const double diff = std::abs(r.points[0].mean - r.rs_formula);
  return {diff < 0.05, "mean (1/n) log Z " + fmt(r.points[0].mean) + " vs RS " +
                           fmt(r.rs_formula) + ", |diff| " + fmt(diff)};
}

Outcome reproducibility() {
  auto render = [](const ExperimentConfig& cfg) {
    const auto t3 = theorem3_experiment(cfg);
    const auto meta = output_metadata(to_json(cfg), cfg.base_seed);
    std::string out = report_envelope("theorem3", to_json(cfg), cfg.base_seed, to_json(t3)).dump(2);
    out += to_csv(t3).render(meta);
    ExperimentConfig c4 = cfg;
    c4.n_list = {10, 12};
    c4.depth = 4;
    const auto t4 = theorem4_experiment(c4);
    out += report_envelope("theorem4", to_json(c4), c4.base_seed, to_json(t4)).dump(2);
    out += to_csv(t4).render(output_metadata(to_json(c4), c4.base_seed));
    return out;
  };
  ExperimentConfig cfg;
  cfg.n_list = {20, 40};
  cfg.replicates = 6;
  cfg.base_seed = 99;
  cfg.threads = 1;
  const std::string first = render(cfg);
  const std::string second = render(cfg);
  cfg.threads = 4;
  const std::string threaded = render(cfg);
  const bool ok = first == second && first == threaded;
  return {ok, std::to_string(first.size()) + " bytes, repeat identical: " +
                  (first == second ? "yes" : "no") +
                  ", 4 threads identical: " + (first == threaded ? "yes" : "no")};
}

}  // namespace

int main() {
  run(1, "scalar self-consistency", 1, scalar_grid);
  run(2, "delta orbit convergence", 2, delta_orbit_convergence);
  run(3, "cavity engine vs path-sum oracle", 1, cavity_oracle);
  run(4, "AMP-Bolthausen identity", 1, amp_bolthausen);
  run(5, "AMP-cavity 1/n scaling", 120, theorem3);
  run(6, "LLN against state evolution", 300, theorem2);
  run(7, "Bolthausen vs exact magnetization", 300, theorem4);
  run(8, "subset stability scaling", 120, stability);
  run(9, "finite-n free energy vs RS formula", 60, free_energy);
  run(10, "byte-identical reruns", 600, reproducibility);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
