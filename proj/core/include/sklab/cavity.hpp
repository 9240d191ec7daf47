#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "sklab/amp.hpp"
#include "sklab/disorder.hpp"
#include "sklab/function_seq.hpp"

namespace sklab {

/// Colexicographic ranking of fixed-size subsets of {0, ..., n-1}.
class SubsetRanker {
 public:
  SubsetRanker(std::size_t n, std::size_t max_size);

  std::uint64_t binomial(std::size_t a, std::size_t b) const;
  std::uint64_t count(std::size_t size) const { return binomial(n_, size); }
  /// sum_m C(s_m, m + 1) over the sorted elements s_0 < s_1 < ...
  std::uint64_t rank(std::span<const std::size_t> sorted) const;
  /// Advances to the colex successor; false after the last subset.
  bool next(std::vector<std::size_t>& subset) const;

 private:
  std::size_t n_;
  std::size_t max_size_;
  std::vector<std::uint64_t> table_;
};

inline constexpr std::size_t kDefaultCavityBudget = 50'000'000;

/// Memoized cavity values w_{S,i}^[k] for a depth-K run.
///
/// Level 0 is u0 and is never stored.  A level whose input denoiser does not
/// depend on S (level 1, or any level above a constant f_k) is evaluated in
/// closed form from one precomputed matrix-vector product.  Every other level
/// k >= 2 is a dense array over the subsets of size exactly K - k, in colex
/// order; within a subset S the components i not in S are stored ascending.
///
/// The table keeps a pointer to the coupling matrix, which must outlive it.
/// `value` fills a private cache and is not safe to call concurrently.
class CavityTable {
 public:
  CavityTable(const DisorderMatrix& a, std::vector<double> u0, FunctionSeq fs, std::size_t depth,
              std::size_t budget);

  std::size_t depth() const { return depth_; }
  std::size_t n() const { return n_; }
  std::size_t budget() const { return budget_; }

  /// True when level k is evaluated without a table.
  bool is_closed_form(std::size_t k) const;
  /// Subset size stored at level k, or -1 if the level has no dense array.
  long stored_subset_size(std::size_t k) const;
  /// Total number of values held in dense arrays and the on-demand cache.
  std::size_t stored_values() const;
  std::size_t cached_values() const { return cache_.size(); }

  /// w_{S,i}^[k], computing and caching values not held in the dense arrays.
  double value(const IndexSet& s, std::size_t i, std::size_t k);

  /// w^[depth]_∅ as an n-vector.
  std::vector<double> root() const;

 private:
  struct ClosedForm {
    std::vector<double> phi;    // S-independent input f_{k-1}(.)
    std::vector<double> field;  // A phi
  };

  double closed_form_value(std::size_t k, std::span<const std::size_t> s, std::size_t i) const;
  double dense_value(std::size_t k, std::span<const std::size_t> s, std::size_t i) const;
  void build();

  const DisorderMatrix* a_;
  std::size_t n_;
  std::vector<double> u0_;
  FunctionSeq fs_;
  std::size_t depth_;
  std::size_t budget_;
  double inv_sqrt_n_;
  SubsetRanker ranker_;
  std::vector<ClosedForm> closed_;          // indexed by level; empty phi if not closed-form
  std::vector<std::vector<double>> dense_;  // indexed by level; empty if none
  std::map<std::tuple<std::size_t, std::vector<std::size_t>, std::size_t>, double> cache_;
};

/// Number of values the dense arrays of a depth-K table hold.
double cavity_storage_estimate(std::size_t n, const FunctionSeq& fs, std::size_t depth);

/// sum_{k=0..K} C(n, K-k) (n - K + k): all states reachable from the root.
double cavity_reachable_count(std::size_t n, std::size_t depth);

struct CavityRun {
  IterTrace trace;  // w^[0..K]
  CavityTable table;
};

/// Runs the cavity iteration to depth K.  Each w^[k] is the root of its own
/// depth-k recursion; the returned table is the depth-K one.
/// Throws DomainError when n <= K and ResourceError when the storage estimate
/// exceeds the budget (counted in values).
CavityRun cavity_run(const DisorderMatrix& a, std::span<const double> u0, const FunctionSeq& fs,
                     std::size_t depth, std::size_t budget = kDefaultCavityBudget);

/// w_{S,i}^[k] from a table (alias of CavityTable::value).
double cavity_subset_value(CavityTable& table, const IndexSet& s, std::size_t i, std::size_t k);

}  // namespace sklab
