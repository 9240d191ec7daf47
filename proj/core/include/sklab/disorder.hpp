#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

namespace sklab {

/// Sorted set of distinct site indices (0-based).
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<std::size_t> items);
  explicit IndexSet(std::vector<std::size_t> items);

  bool contains(std::size_t i) const;
  /// Copy with i added.
  IndexSet with(std::size_t i) const;
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::span<const std::size_t> items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
  friend auto operator<=>(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> items_;
};

/// Symmetric n x n coupling matrix with zero diagonal and i.i.d. N(0,1)
/// entries above it.  Entry (i, j) is a pure function of (seed, min, max).
class DisorderMatrix {
 public:
  DisorderMatrix(std::size_t n, std::uint64_t seed, std::vector<double> entries);

  std::size_t n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * n_, n_};
  }
  std::span<const double> data() const { return entries_; }

  /// Same matrix with rows and columns relabelled: result(a, b) = this(perm[a], perm[b]).
  DisorderMatrix permuted(std::span<const std::size_t> perm) const;

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::vector<double> entries_;
};

/// The (i, j) coupling for a seed, i != j.
double coupling_entry(std::uint64_t seed, std::size_t i, std::size_t j);

/// Throws DomainError for n == 0.
DisorderMatrix sample_matrix(std::size_t n, std::uint64_t seed);

struct RestrictedRow {
  std::vector<std::size_t> indices;
  std::vector<double> values;
};

/// (a_ij) for j not in S and j != i, ascending in j.  Throws DomainError if i is in S.
RestrictedRow restricted_row(const DisorderMatrix& a, std::size_t i, const IndexSet& s);

/// y = A x.
std::vector<double> mat_vec(const DisorderMatrix& a, std::span<const double> x);

/// Binary layout: uint64 n, uint64 seed, then n*n little-endian float64, row-major.
void save_matrix(const DisorderMatrix& a, const std::filesystem::path& path);
DisorderMatrix load_matrix(const std::filesystem::path& path);

}  // namespace sklab
