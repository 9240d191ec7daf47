#include <doctest.h>

#include <cmath>

#include "sklab/error.hpp"
#include "sklab/experiments.hpp"

using namespace sklab;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_list = {12, 24};
  cfg.replicates = 4;
  cfg.depth = 2;
  cfg.samples = 6;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.n_list = {2};
  cfg.depth = 2;
  try {
    cfg.validate();
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("n >= K+1") != std::string::npos);
  }
  cfg = small_config();
  cfg.preset = "cubic";
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.w0 = "0.1:0.2";
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.n_list.clear();
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("config serialization leaves out the thread count") {
  ExperimentConfig a = small_config();
  ExperimentConfig b = a;
  b.threads = 7;
  CHECK(to_json(a) == to_json(b));
  CHECK_FALSE(to_json(a).contains("threads"));
  b.base_seed = 2;
  CHECK(config_hash(to_json(a)) != config_hash(to_json(b)));
}

TEST_CASE("LLN experiment with zero denoisers matches the zero table") {
  ExperimentConfig cfg = small_config();
  cfg.preset = "zero";
  cfg.depth = 3;
  const Theorem2Report r = theorem2_experiment(cfg);
  for (const auto& p : r.points) {
    for (const auto& c : p.moments) {
      CHECK(c.empirical == 0.0);
      CHECK(c.predicted == 0.0);
    }
    for (const auto& c : p.variances) CHECK(c.empirical == 0.0);
    // w^[k] = 0 and the stratified u0 reproduces the atoms exactly.
    for (const auto& c : p.psi) CHECK(std::abs(c.deviation()) < 1e-14);
    CHECK(p.psi.size() == 4);
  }
}

TEST_CASE("LLN experiment predictions follow state evolution") {
  ExperimentConfig cfg = small_config();
  cfg.n_list = {300};
  cfg.replicates = 6;
  cfg.tanh_offset = 0.3;
  const Theorem2Report r = theorem2_experiment(cfg);
  for (const auto& c : r.points[0].moments) {
    CHECK(c.se >= 0.0);
    CHECK(std::abs(c.deviation()) < 5.0 * c.se + 0.02);
  }
  for (const auto& c : r.points[0].psi) CHECK(std::abs(c.deviation()) < 0.05);
  CHECK(r.points[0].max_psi_deviation >= 0.0);
}

TEST_CASE("AMP-cavity distance is exactly zero at depth 0 and 1") {
  for (std::size_t k : {0, 1}) {
    ExperimentConfig cfg = small_config();
    cfg.depth = k;
    const Theorem3Report r = theorem3_experiment(cfg);
    for (const auto& s : r.per_k) {
      CHECK(s.exact_zero);
      for (const auto& p : s.points) CHECK(p.mean == 0.0);
      CHECK_FALSE(s.fit.has_value());
    }
  }
  ExperimentConfig cfg = small_config();
  const Theorem3Report r = theorem3_experiment(cfg);
  REQUIRE(r.per_k[2].fit.has_value());
  CHECK(std::isnan(r.per_k[2].fit->half_width));  // two sizes only
  for (const auto& p : r.per_k[2].points) {
    CHECK(p.mean > 0.0);
    CHECK(p.se >= 0.0);
  }
}

TEST_CASE("stability closed forms") {
  for (std::size_t k : {0, 1}) {
    ExperimentConfig cfg = small_config();
    cfg.depth = k;
    const StabilityReport r = stability_experiment(cfg);
    REQUIRE(r.closed_form_max_error.has_value());
    CHECK(*r.closed_form_max_error < 1e-14);
    if (k == 0) CHECK(r.scaling.exact_zero);
  }
  ExperimentConfig cfg = small_config();
  cfg.depth = 4;
  CHECK_THROWS_AS(stability_experiment(cfg), DomainError);
  cfg.depth = 2;
  CHECK_FALSE(stability_experiment(cfg).closed_form_max_error.has_value());
}

TEST_CASE("Bolthausen-Gibbs experiment in the decoupled limit") {
  ExperimentConfig cfg = small_config();
  cfg.model = {1e-6, 0.4};
  cfg.depth = 4;
  const Theorem4Report r = theorem4_experiment(cfg);
  CHECK_FALSE(r.at_warning);
  for (const auto& p : r.points)
    for (const auto& row : p.rows) {
      if (row.k >= 2) {
        CHECK(row.mean < 1e-6);
        REQUIRE(row.theory.has_value());
        CHECK(std::abs(*row.theory) < 1e-6);
      } else {
        CHECK_FALSE(row.theory.has_value());
      }
    }
  cfg.n_list = {30};
  CHECK_THROWS_AS(theorem4_experiment(cfg), ResourceError);
}

TEST_CASE("Bolthausen-Gibbs experiment flags parameters outside the AT line") {
  ExperimentConfig cfg = small_config();
  cfg.model = {2.0, 0.05};
  cfg.n_list = {10};
  cfg.replicates = 2;
  const Theorem4Report r = theorem4_experiment(cfg);
  CHECK(r.at_warning);
  CHECK(r.scalar.at_gap >= 1.0);
}

TEST_CASE("cavity overlap quantities") {
  ExperimentConfig cfg = small_config();
  cfg.n_list = {10};
  cfg.depth = 3;
  const Proposition6Report r = proposition6_experiment(cfg);
  for (const auto& p : r.points)
    for (const auto& s : p.summaries) CHECK(s.max_abs_rho <= 1.0 + 1e-15);

  cfg.model = {1e-6, 0.4};
  const Proposition6Report d = proposition6_experiment(cfg);
  const double t2 = std::tanh(0.4) * std::tanh(0.4);
  // Sums run over the n - |S| free sites with a 1/n normalization.
  for (const auto& s : d.points[0].summaries) {
    const double target = t2 * (s.subsets == "empty" ? 1.0 : 0.9);
    CHECK(std::abs(s.mean_d - target) < 1e-5);
    CHECK(std::abs(s.mean_e - target) < 1e-5);
    CHECK(std::abs(s.mean_r - target) < 1e-5);
  }
  CHECK(d.points[0].summaries[0].subsets == "empty");
  CHECK(d.points[0].summaries[1].count == 4 * 6);
}

// At n = 14 the replicate standard error of R (about 0.0022 at 100
// replicates) exceeds half the gap between Q and Delta^2(Q) (about 0.0017),
// so the literal 100-replicate comparison is decided by noise; it is kept
// visible but does not gate the suite.  The powered version below does.
TEST_CASE("cavity overlap orbit progression, 100 replicates" * doctest::may_fail()) {
  ExperimentConfig cfg;
  cfg.model = {0.25, 0.4};
  cfg.n_list = {14};
  cfg.depth = 3;
  cfg.replicates = 100;
  const Proposition6Report r = proposition6_experiment(cfg);
  const auto& s = r.points[0].summaries[0];
  MESSAGE("R_empty^3 " << s.mean_r << " +/- " << s.se_r << ", Delta^2(Q) " << r.r_target
                       << ", Q " << r.big_q);
  CHECK(std::abs(s.mean_r - r.r_target) < std::abs(s.mean_r - r.big_q));
}

TEST_CASE("cavity overlap orbit progression, 2000 replicates") {
  ExperimentConfig cfg;
  cfg.model = {0.25, 0.4};
  cfg.n_list = {14};
  cfg.depth = 3;
  cfg.replicates = 2000;
  cfg.samples = 1;
  const Proposition6Report r = proposition6_experiment(cfg);
  const auto& s = r.points[0].summaries[0];
  MESSAGE("R_empty^3 " << s.mean_r << " +/- " << s.se_r << ", Delta^2(Q) " << r.r_target
                       << ", Q " << r.big_q);
  CHECK(std::abs(s.mean_r - r.r_target) < std::abs(s.mean_r - r.big_q));
  CHECK(std::abs(s.mean_r - r.r_target) < 3.0 * s.se_r);
}

TEST_CASE("free energy experiment") {
  ExperimentConfig cfg = small_config();
  cfg.model = {0.0, 0.3};
  cfg.n_list = {8};
  const FreeEnergyReport r = free_energy_experiment(cfg);
  const double exact = std::log(2.0) + std::log(std::cosh(0.3));
  CHECK(r.points[0].mean == doctest::Approx(exact).epsilon(1e-14));
  CHECK(r.rs_formula == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("experiments are pure functions of the config") {
  ExperimentConfig cfg = small_config();
  cfg.threads = 1;
  const auto a = to_json(theorem3_experiment(cfg)).dump();
  cfg.threads = 3;
  const auto b = to_json(theorem3_experiment(cfg)).dump();
  CHECK(a == b);
  const auto c1 = to_csv(stability_experiment(cfg)).render({});
  const auto c2 = to_csv(stability_experiment(cfg)).render({});
  CHECK(c1 == c2);
  cfg.base_seed = 2;
  CHECK(to_json(theorem3_experiment(cfg)).dump() != a);
}

TEST_CASE("CSV tables carry one row per point") {
  ExperimentConfig cfg = small_config();
  const Theorem3Report t3 = theorem3_experiment(cfg);
  CHECK(to_csv(t3).rows().size() == 3 * 2);
  CHECK(to_csv(t3).columns()[4] == "slope");
  cfg.n_list = {10, 12};
  const Theorem4Report t4 = theorem4_experiment(cfg);
  CHECK(to_csv(t4).rows().size() == 2 * 3);
  const auto j = to_json(t4);
  CHECK(j["points"][0]["rows"][0]["theory"].is_null());
}
