#include "sklab/disorder.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "sklab/error.hpp"
#include "sklab/rng.hpp"

namespace sklab {

IndexSet::IndexSet(std::initializer_list<std::size_t> items) : IndexSet(std::vector(items)) {}

IndexSet::IndexSet(std::vector<std::size_t> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  if (std::adjacent_find(items_.begin(), items_.end()) != items_.end()) {
    throw DomainError("IndexSet: duplicate index");
  }
}

bool IndexSet::contains(std::size_t i) const {
  return std::binary_search(items_.begin(), items_.end(), i);
}

IndexSet IndexSet::with(std::size_t i) const {
  IndexSet out;
  out.items_.reserve(items_.size() + 1);
  const auto pos = std::lower_bound(items_.begin(), items_.end(), i);
  if (pos != items_.end() && *pos == i) throw DomainError("IndexSet: index already present");
  out.items_.insert(out.items_.end(), items_.begin(), pos);
  out.items_.push_back(i);
  out.items_.insert(out.items_.end(), pos, items_.end());
  return out;
}

DisorderMatrix::DisorderMatrix(std::size_t n, std::uint64_t seed, std::vector<double> entries)
    : n_(n), seed_(seed), entries_(std::move(entries)) {
  if (n_ == 0) throw DomainError("DisorderMatrix: n must be >= 1");
  if (entries_.size() != n_ * n_) throw DomainError("DisorderMatrix: entry count != n*n");
}

DisorderMatrix DisorderMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw DomainError("permuted: permutation length != n");
  std::vector<double> out(n_ * n_);
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b) out[a * n_ + b] = (*this)(perm[a], perm[b]);
  return DisorderMatrix(n_, seed_, std::move(out));
}

double coupling_entry(std::uint64_t seed, std::size_t i, std::size_t j) {
  const std::uint64_t lo = std::min(i, j);
  const std::uint64_t hi = std::max(i, j);
  return normal_quantile(uniform_open(hash_combine(hash_combine(seed, lo), hi)));
}

DisorderMatrix sample_matrix(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_matrix: n must be >= 1");
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = coupling_entry(seed, i, j);
      e[i * n + j] = v;
      e[j * n + i] = v;
    }
  }
  return DisorderMatrix(n, seed, std::move(e));
}

RestrictedRow restricted_row(const DisorderMatrix& a, std::size_t i, const IndexSet& s) {
  if (i >= a.n()) throw DomainError("restricted_row: index out of range");
  if (s.contains(i)) throw DomainError("restricted_row: i must not belong to S");
  RestrictedRow out;
  const auto row = a.row(i);
  for (std::size_t j = 0; j < a.n(); ++j) {
    if (j == i || s.contains(j)) continue;
    out.indices.push_back(j);
    out.values.push_back(row[j]);
  }
  return out;
}

std::vector<double> mat_vec(const DisorderMatrix& a, std::span<const double> x) {
  const std::size_t n = a.n();
  if (x.size() != n) throw DomainError("mat_vec: vector length != n");
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void write_le(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DomainError("load_matrix: truncated file");
  return to_little(v);
}

}  // namespace

void save_matrix(const DisorderMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("save_matrix: cannot open " + path.string());
  write_le<std::uint64_t>(out, a.n());
  write_le<std::uint64_t>(out, a.seed());
  for (double v : a.data()) write_le<double>(out, v);
}

DisorderMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("load_matrix: cannot open " + path.string());
  const auto n = read_le<std::uint64_t>(in);
  const auto seed = read_le<std::uint64_t>(in);
  if (n == 0 || n > (1u << 16)) throw DomainError("load_matrix: implausible dimension");
  std::vector<double> e(n * n);
  for (auto& v : e) v = read_le<double>(in);
  for (std::size_t i = 0; i < n; ++i) {
    if (e[i * n + i] != 0.0) throw DomainError("load_matrix: non-zero diagonal");
    for (std::size_t j = i + 1; j < n; ++j)
      if (e[i * n + j] != e[j * n + i]) throw DomainError("load_matrix: matrix is not symmetric");
  }
  return DisorderMatrix(n, seed, std::move(e));
}

}  // namespace sklab
