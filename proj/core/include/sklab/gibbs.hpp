#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "sklab/disorder.hpp"
#include "sklab/scalar.hpp"

namespace sklab {

inline constexpr std::size_t kMaxEnumeratedSpins = 24;

/// Exact Gibbs averages of the SK model restricted to the sites outside S.
///
/// The Hamiltonian keeps the 1/sqrt(n) scale of the full system:
///   H_S(sigma) = -(beta/sqrt(n)) sum_{i<j not in S} a_ij s_i s_j - h sum_{i not in S} s_i.
struct GibbsSummary {
  IndexSet excluded;
  std::vector<std::size_t> sites;      // [n] \ S ascending
  std::vector<double> magnetizations;  // <s_i>_S, aligned with sites
  std::vector<double> pair_corr;       // <s_i s_j>_S, sites x sites, unit diagonal; may be empty
  double log_z = 0.0;
  double min_energy = 0.0;  // min_sigma H_S
  std::size_t n_full = 0;

  std::size_t n_eff() const { return sites.size(); }
  bool has_pairs() const { return !pair_corr.empty(); }
  /// <s_i>_S by original site index.  Throws DomainError if i is in S.
  double magnetization(std::size_t i) const;
  double pair(std::size_t a, std::size_t b) const { return pair_corr[a * sites.size() + b]; }
};

struct GibbsOptions {
  bool pair_correlations = true;
};

/// Gray-code enumeration of all 2^(n-|S|) configurations with a streaming
/// log-sum-exp.  Throws ResourceError when n - |S| exceeds 24.
GibbsSummary exact_gibbs(const DisorderMatrix& a, const ModelParams& p, const IndexSet& s,
                         const GibbsOptions& opt = {});

/// Two-replica overlap moments of one Gibbs measure.
struct OverlapMoments {
  double mean_r = 0.0;         // <R> = (1/n_eff) sum_i <s_i>^2
  double second_r = 0.0;       // <R^2> = (1/n_eff^2) sum_{i,j} <s_i s_j>^2
  double concentration = 0.0;  // <(R - q)^2>
};

/// Requires pair correlations in g.
OverlapMoments overlap_moments(const GibbsSummary& g, double q);

/// Lazily computed Gibbs summaries keyed by the excluded set.
class GibbsCache {
 public:
  GibbsCache(const DisorderMatrix& a, ModelParams p, GibbsOptions opt = {.pair_correlations = false})
      : a_(&a), p_(p), opt_(opt) {}

  const GibbsSummary& get(const IndexSet& s);
  const DisorderMatrix& matrix() const { return *a_; }
  const ModelParams& params() const { return p_; }

 private:
  const DisorderMatrix* a_;
  ModelParams p_;
  GibbsOptions opt_;
  std::map<IndexSet, GibbsSummary> cache_;
};

/// <s_i>_S - tanh((beta/sqrt(n)) sum_{j not in S ∪ {i}} a_ij <s_j>_{S ∪ {i}} + h).
double cavity_residual(const IndexSet& s, std::size_t i, GibbsCache& cache);

struct FreeEnergyCheck {
  double finite_n = 0.0;    // (1/n) log Z
  double rs_formula = 0.0;  // replica-symmetric value at q(beta, h)
};

FreeEnergyCheck free_energy_check(const DisorderMatrix& a, const ModelParams& p, double q);

/// Per-site residual of the TAP equations at a given magnetization vector:
///   m_i - tanh((beta/sqrt(n)) sum_{j != i} a_ij m_j + h - beta^2 (1 - |m|^2) m_i).
std::vector<double> tap_residual(const DisorderMatrix& a, const ModelParams& p,
                                 std::span<const double> m);

}  // namespace sklab
