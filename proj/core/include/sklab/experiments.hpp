#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sklab/cavity.hpp"
#include "sklab/function_seq.hpp"
#include "sklab/gibbs.hpp"
#include "sklab/report.hpp"
#include "sklab/scalar.hpp"
#include "sklab/state_evolution.hpp"
#include "sklab/stats.hpp"

namespace sklab {

/// Parameters shared by the Monte Carlo experiments.  Replicate r draws its
/// coupling matrix from replicate_seed(base_seed, r).
struct ExperimentConfig {
  ModelParams model{0.25, 0.4};
  std::vector<std::size_t> n_list{50, 100, 200, 400};
  std::size_t depth = 2;
  std::size_t replicates = 20;
  std::uint64_t base_seed = 1;
  /// zero | constant | tanh | bolthausen
  std::string preset = "tanh";
  double tanh_gain = 1.0;
  double tanh_offset = 0.0;
  double constant_value = 0.5;
  /// Law of the initial vector; the bolthausen preset always uses u = 0.
  std::string w0 = "0.3:0.5,0.9:0.5";
  /// Random (S, i) draws per replicate for the stability and subset experiments.
  std::size_t samples = 32;
  std::size_t threads = 0;
  std::size_t budget = kDefaultCavityBudget;

  /// Throws DomainError naming the violated constraint.
  void validate() const;
};

/// Everything but `threads`, which never affects results.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Denoisers, initial law and (for bolthausen) the solved scalars of a config.
struct ExperimentSetup {
  FunctionSeq fs;
  AtomLaw w0;
  std::optional<ScalarSolution> scalar;
};
ExperimentSetup make_setup(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- law of large numbers

struct EstimateCheck {
  std::string name;
  double empirical = 0.0;  // mean over replicates
  double se = 0.0;         // standard error over replicates
  double predicted = 0.0;  // state-evolution or quadrature value
  double deviation() const { return empirical - predicted; }
};

struct Theorem2Point {
  std::size_t n = 0;
  std::vector<EstimateCheck> moments;    // (1/n) sum w^[a] w^[b], 1 <= a <= b <= K
  std::vector<EstimateCheck> variances;  // sample variance of w^[k], k >= 1
  std::vector<EstimateCheck> psi;        // test-function battery
  double max_moment_deviation = 0.0;
  double max_psi_deviation = 0.0;
};

struct Theorem2Report {
  ExperimentConfig config;
  CovarianceTable sigma;
  std::optional<ScalarSolution> scalar;
  std::vector<Theorem2Point> points;
};

/// Cavity iterates against the state evolution: second moments, variances
/// and a fixed battery of bounded Lipschitz test functions psi(w^[K..0]).
Theorem2Report theorem2_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- scaling

struct ScalingPoint {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct ScalingReport {
  std::string quantity;
  std::size_t k = 0;
  std::vector<ScalingPoint> points;
  /// True when every sample was exactly zero; no fit is attempted then.
  bool exact_zero = false;
  std::optional<SlopeFit> fit;
};

struct Theorem3Report {
  ExperimentConfig config;
  std::vector<ScalingReport> per_k;  // k = 0..K
};

/// (1/n)|u^[k] - w^[k]|^2 between AMP and cavity iterates.  Levels k <= 1 are
/// checked to be exactly zero (ConsistencyError otherwise).
Theorem3Report theorem3_experiment(const ExperimentConfig& cfg);

struct StabilityReport {
  ExperimentConfig config;
  ScalingReport scaling;
  /// max |diff - a_{ii'} f_0(u_{i'}) / sqrt(n)| at k = 1 and max |diff| at k = 0.
  std::optional<double> closed_form_max_error;
};

/// Squared difference w_{S,i}^[k] - w_{S ∪ {i'},i}^[k] over random (S, i, i')
/// with |S| <= 2, averaged per n and fitted in log-log.
StabilityReport stability_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- Bolthausen vs Gibbs

struct DistanceRow {
  std::size_t k = 0;
  double mean = 0.0;
  double se = 0.0;
  std::optional<double> theory;  // 2q - 2 Delta^(k-1)(Q) for k >= 2
};

struct Theorem4Point {
  std::size_t n = 0;
  std::vector<DistanceRow> rows;  // k = 0..K
};

struct Theorem4Report {
  ExperimentConfig config;
  ScalarSolution scalar;
  double big_q = 0.0;
  bool at_warning = false;  // at_gap >= 1
  std::vector<Theorem4Point> points;
};

/// (1/n)|<sigma> - m^[k]|^2 from exact enumeration and Bolthausen's iteration.
Theorem4Report theorem4_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- cavity overlaps

struct OverlapTriple {
  double d = 0.0;    // (1/n) sum_j <s_j>_S^2
  double e = 0.0;    // (1/n) sum_j nu_{S,j}^2
  double r = 0.0;    // (1/n) sum_j <s_j>_S nu_{S,j}
  double rho = 0.0;  // r / sqrt(d e)
};

/// D_S, E_S^k, R_S^k and rho_S^k for one excluded set, nu = f_k(w_S^[k]).
OverlapTriple overlap_triple(const GibbsSummary& g, CavityTable& table, const FunctionSeq& fs,
                             std::size_t k);

struct OverlapSummary {
  std::string subsets;  // "empty" or "singleton"
  std::size_t count = 0;
  double mean_d = 0.0, mean_e = 0.0, mean_r = 0.0, mean_rho = 0.0;
  double se_r = 0.0;
  double msd_d = 0.0;  // mean (D - q)^2
  double msd_e = 0.0;  // mean (E - q)^2
  double msd_r = 0.0;  // mean (R - Delta^(k-1)(Q))^2
  double max_abs_rho = 0.0;
};

struct Proposition6Point {
  std::size_t n = 0;
  std::vector<OverlapSummary> summaries;
};

struct Proposition6Report {
  ExperimentConfig config;
  ScalarSolution scalar;
  double big_q = 0.0;
  double r_target = 0.0;  // Delta^(k-1)(Q)
  std::vector<Proposition6Point> points;
};

Proposition6Report proposition6_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- free energy / TAP

struct FreeEnergyPoint {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct FreeEnergyReport {
  ExperimentConfig config;
  double q = 0.0;
  double rs_formula = 0.0;
  std::vector<FreeEnergyPoint> points;
};

/// Mean finite-n (1/n) log Z over replicates against the replica-symmetric formula.
FreeEnergyReport free_energy_experiment(const ExperimentConfig& cfg);

/// TAP residual per site at the exact magnetizations of g (S must be empty).
std::vector<double> tap_residual_diagnostic(const DisorderMatrix& a, const ModelParams& p,
                                            const GibbsSummary& g);

/// Root mean square.
double rms(std::span<const double> xs);

// ---------------------------------------------------------------- serialization

nlohmann::json to_json(const Theorem2Report& r);
nlohmann::json to_json(const Theorem3Report& r);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const Theorem4Report& r);
nlohmann::json to_json(const Proposition6Report& r);
nlohmann::json to_json(const FreeEnergyReport& r);

CsvTable to_csv(const Theorem2Report& r);
CsvTable to_csv(const Theorem3Report& r);
CsvTable to_csv(const StabilityReport& r);
CsvTable to_csv(const Theorem4Report& r);
CsvTable to_csv(const Proposition6Report& r);
CsvTable to_csv(const FreeEnergyReport& r);

}  // namespace sklab
