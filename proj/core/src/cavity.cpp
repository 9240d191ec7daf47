#include "sklab/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {

SubsetRanker::SubsetRanker(std::size_t n, std::size_t max_size)
    : n_(n), max_size_(max_size + 1), table_((n + 1) * (max_size + 2), 0) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t a = 0; a <= n_; ++a) {
    table_[a * (max_size_ + 1)] = 1;
    for (std::size_t b = 1; b <= max_size_ && b <= a; ++b) {
      const std::uint64_t x = table_[(a - 1) * (max_size_ + 1) + b - 1];
      const std::uint64_t y = b <= a - 1 ? table_[(a - 1) * (max_size_ + 1) + b] : 0;
      table_[a * (max_size_ + 1) + b] = x > kMax - y ? kMax : x + y;
    }
  }
}

std::uint64_t SubsetRanker::binomial(std::size_t a, std::size_t b) const {
  if (b > a) return 0;
  if (a > n_ || b > max_size_) throw DomainError("SubsetRanker: binomial out of table range");
  return table_[a * (max_size_ + 1) + b];
}

std::uint64_t SubsetRanker::rank(std::span<const std::size_t> sorted) const {
  std::uint64_t r = 0;
  for (std::size_t m = 0; m < sorted.size(); ++m) r += binomial(sorted[m], m + 1);
  return r;
}

bool SubsetRanker::next(std::vector<std::size_t>& subset) const {
  const std::size_t s = subset.size();
  for (std::size_t m = 0; m < s; ++m) {
    const std::size_t limit = m + 1 < s ? subset[m + 1] : n_;
    if (subset[m] + 1 < limit) {
      ++subset[m];
      for (std::size_t j = 0; j < m; ++j) subset[j] = j;
      return true;
    }
  }
  return false;
}

namespace {

double binomial_d(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
  return std::round(r);
}

bool level_is_closed_form(const FunctionSeq& fs, std::size_t k) {
  return k == 1 || (k >= 2 && fs.constant(k - 1).has_value());
}

// Position of i among the complement of the sorted set s.
std::size_t complement_pos(std::span<const std::size_t> s, std::size_t i) {
  return i - static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), i) - s.begin());
}

}  // namespace

double cavity_storage_estimate(std::size_t n, const FunctionSeq& fs, std::size_t depth) {
  double total = 0.0;
  for (std::size_t k = 2; k <= depth; ++k) {
    if (level_is_closed_form(fs, k)) continue;
    const std::size_t s = depth - k;
    total += binomial_d(n, s) * static_cast<double>(n - s);
  }
  return total;
}

double cavity_reachable_count(std::size_t n, std::size_t depth) {
  double total = 0.0;
  for (std::size_t k = 0; k <= depth; ++k) {
    const std::size_t s = depth - k;
    if (s > n) continue;
    total += binomial_d(n, s) * static_cast<double>(n - s);
  }
  return total;
}

CavityTable::CavityTable(const DisorderMatrix& a, std::vector<double> u0, FunctionSeq fs,
                         std::size_t depth, std::size_t budget)
    : a_(&a),
      n_(a.n()),
      u0_(std::move(u0)),
      fs_(std::move(fs)),
      depth_(depth),
      budget_(budget),
      inv_sqrt_n_(1.0 / std::sqrt(static_cast<double>(a.n()))),
      ranker_(a.n(), depth + 1),
      closed_(depth + 1),
      dense_(depth + 1) {
  if (u0_.size() != n_) throw DomainError("cavity: u0 length must equal n");
  if (n_ <= depth_) {
    std::ostringstream msg;
    msg << "cavity: requires n >= K+1 (got n = " << n_ << ", K = " << depth_ << ")";
    throw DomainError(msg.str());
  }
  const double estimate = cavity_storage_estimate(n_, fs_, depth_);
  if (estimate > static_cast<double>(budget_)) {
    std::ostringstream msg;
    msg << "cavity: dense tables need about " << estimate << " values (n = " << n_
        << ", K = " << depth_ << "), above the budget of " << budget_;
    throw ResourceError(msg.str());
  }
  build();
}

bool CavityTable::is_closed_form(std::size_t k) const { return !closed_[k].phi.empty(); }

long CavityTable::stored_subset_size(std::size_t k) const {
  if (k > depth_ || dense_[k].empty()) return -1;
  return static_cast<long>(depth_ - k);
}

std::size_t CavityTable::stored_values() const {
  std::size_t total = cache_.size();
  for (const auto& d : dense_) total += d.size();
  return total;
}

double CavityTable::closed_form_value(std::size_t k, std::span<const std::size_t> s,
                                      std::size_t i) const {
  const auto& cf = closed_[k];
  const auto row = a_->row(i);
  double acc = cf.field[i];
  for (std::size_t j : s) acc -= row[j] * cf.phi[j];
  return acc * inv_sqrt_n_;
}

double CavityTable::dense_value(std::size_t k, std::span<const std::size_t> s,
                                std::size_t i) const {
  const std::size_t width = n_ - s.size();
  return dense_[k][ranker_.rank(s) * width + complement_pos(s, i)];
}

void CavityTable::build() {
  for (std::size_t k = 1; k <= depth_; ++k) {
    if (!level_is_closed_form(fs_, k)) continue;
    auto& cf = closed_[k];
    cf.phi.resize(n_);
    if (k == 1) {
      for (std::size_t j = 0; j < n_; ++j) cf.phi[j] = fs_(0, u0_[j]);
    } else {
      std::fill(cf.phi.begin(), cf.phi.end(), *fs_.constant(k - 1));
    }
    cf.field = mat_vec(*a_, cf.phi);
  }

  std::vector<char> member(n_, 0);
  std::vector<double> source_row(n_);
  std::vector<double> source_f;  // f_{k-1} applied to the dense source level

  for (std::size_t k = 2; k <= depth_; ++k) {
    if (is_closed_form(k)) continue;
    const std::size_t s = depth_ - k;
    const std::size_t width = n_ - s;
    const bool source_dense = !is_closed_form(k - 1);
    if (source_dense) {
      const auto& src = dense_[k - 1];
      source_f.resize(src.size());
      for (std::size_t e = 0; e < src.size(); ++e) source_f[e] = fs_(k - 1, src[e]);
    }
    auto& out = dense_[k];
    out.assign(static_cast<std::size_t>(ranker_.count(s)) * width, 0.0);

    std::vector<std::size_t> subset(s);
    for (std::size_t j = 0; j < s; ++j) subset[j] = j;
    std::vector<std::size_t> extended(s + 1);
    std::uint64_t r = 0;
    do {
      for (std::size_t j : subset) member[j] = 1;
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (member[i]) continue;
        // S' = S ∪ {i}, sorted.
        const auto ins = std::lower_bound(subset.begin(), subset.end(), i);
        std::copy(subset.begin(), ins, extended.begin());
        extended[ins - subset.begin()] = i;
        std::copy(ins, subset.end(), extended.begin() + (ins - subset.begin()) + 1);
        member[i] = 1;

        const double* row_f = nullptr;
        if (source_dense) {
          row_f = source_f.data() + ranker_.rank(extended) * (width - 1);
        } else {
          std::size_t idx = 0;
          for (std::size_t l = 0; l < n_; ++l) {
            if (member[l]) continue;
            source_row[idx++] = fs_(k - 1, closed_form_value(k - 1, extended, l));
          }
          row_f = source_row.data();
        }

        const auto arow = a_->row(i);
        double acc = 0.0;
        std::size_t idx = 0;
        for (std::size_t l = 0; l < n_; ++l) {
          if (member[l]) continue;
          acc += arow[l] * row_f[idx++];
        }
        out[r * width + pos] = acc * inv_sqrt_n_;
        member[i] = 0;
        ++pos;
      }
      for (std::size_t j : subset) member[j] = 0;
      ++r;
    } while (ranker_.next(subset));

    // The source level is no longer needed once its only consumer is built.
    if (source_dense) std::vector<double>().swap(source_f);
  }
}

std::vector<double> CavityTable::root() const {
  if (depth_ == 0) return u0_;
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    out[i] = is_closed_form(depth_) ? closed_form_value(depth_, {}, i) : dense_[depth_][i];
  }
  return out;
}

double CavityTable::value(const IndexSet& s, std::size_t i, std::size_t k) {
  if (i >= n_) throw DomainError("cavity_subset_value: index out of range");
  if (s.contains(i)) throw DomainError("cavity_subset_value: i must not belong to S");
  if (k > depth_) {
    std::ostringstream msg;
    msg << "cavity_subset_value: level " << k << " exceeds the table depth " << depth_;
    throw DomainError(msg.str());
  }
  if (s.size() + k + 1 > n_) throw DomainError("cavity_subset_value: requires |S| <= n-(k+1)");
  if (k == 0) return u0_[i];
  if (is_closed_form(k)) return closed_form_value(k, s.items(), i);
  if (stored_subset_size(k) == static_cast<long>(s.size())) return dense_value(k, s.items(), i);

  auto key = std::make_tuple(k, std::vector<std::size_t>(s.begin(), s.end()), i);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (stored_values() >= budget_) {
    throw ResourceError("cavity_subset_value: on-demand cache reached the memory budget");
  }

  const IndexSet extended = s.with(i);
  const auto arow = a_->row(i);
  double acc = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (extended.contains(j)) continue;
    acc += arow[j] * fs_(k - 1, value(extended, j, k - 1));
  }
  const double v = acc * inv_sqrt_n_;
  cache_.emplace(std::move(key), v);
  return v;
}

CavityRun cavity_run(const DisorderMatrix& a, std::span<const double> u0, const FunctionSeq& fs,
                     std::size_t depth, std::size_t budget) {
  std::vector<double> u(u0.begin(), u0.end());
  CavityTable table(a, u, fs, depth, budget);
  IterTrace trace;
  trace.levels.reserve(depth + 1);
  trace.levels.push_back(u);
  for (std::size_t k = 1; k < depth; ++k) {
    trace.levels.push_back(CavityTable(a, u, fs, k, budget).root());
  }
  if (depth >= 1) trace.levels.push_back(table.root());
  return CavityRun{std::move(trace), std::move(table)};
}

double cavity_subset_value(CavityTable& table, const IndexSet& s, std::size_t i, std::size_t k) {
  return table.value(s, i, k);
}

}  // namespace sklab
