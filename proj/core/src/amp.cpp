#include "sklab/amp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {

double sq_norm(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

std::vector<double> IterTrace::sq_norms() const {
  std::vector<double> out;
  out.reserve(levels.size());
  for (const auto& v : levels) out.push_back(sq_norm(v));
  return out;
}

IterTrace amp_run(const DisorderMatrix& a, std::span<const double> u0, const FunctionSeq& fs,
                  std::size_t depth) {
  const std::size_t n = a.n();
  if (depth < 1) throw DomainError("amp_run: depth must be >= 1");
  if (u0.size() != n) throw DomainError("amp_run: u0 length must equal n");
  if (sq_norm(u0) > 1.0) {
    std::ostringstream msg;
    msg << "amp_run: initial vector violates ||u|| <= 1 (got (1/n)|u|^2 = " << sq_norm(u0) << ")";
    throw DomainError(msg.str());
  }
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  IterTrace trace;
  trace.levels.reserve(depth + 1);
  trace.levels.emplace_back(u0.begin(), u0.end());

  std::vector<double> fk(n);
  std::vector<double> fprev(n);
  for (std::size_t k = 0; k < depth; ++k) {
    const auto& cur = trace.levels[k];
    double onsager = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      fk[j] = fs(k, cur[j]);
      if (k >= 1) onsager += fs.derivative(k, cur[j]);
    }
    onsager /= static_cast<double>(n);
    std::vector<double> next = mat_vec(a, fk);
    for (auto& v : next) v *= inv_sqrt_n;
    if (k >= 1) {
      const auto& prev = trace.levels[k - 1];
      for (std::size_t i = 0; i < n; ++i) next[i] -= onsager * fs(k - 1, prev[i]);
    }
    trace.levels.push_back(std::move(next));
  }
  return trace;
}

BolthausenRun bolthausen_run(const DisorderMatrix& a, const ModelParams& p, double q,
                             std::size_t depth) {
  p.validate();
  if (depth < 1) throw DomainError("bolthausen_run: depth must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("bolthausen_run: q must lie in [0, 1]");
  const std::size_t n = a.n();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  BolthausenRun run;
  run.m.levels.reserve(depth + 1);
  run.m.levels.emplace_back(n, 0.0);
  run.m.levels.emplace_back(n, std::sqrt(q));
  for (std::size_t k = 1; k < depth; ++k) {
    const auto& cur = run.m.levels[k];
    const auto& prev = run.m.levels[k - 1];
    const double onsager = p.beta * p.beta * (1.0 - sq_norm(cur));
    std::vector<double> field = mat_vec(a, cur);
    for (std::size_t i = 0; i < n; ++i) {
      field[i] = std::tanh(p.beta * inv_sqrt_n * field[i] + p.h - onsager * prev[i]);
    }
    run.m.levels.push_back(std::move(field));
  }

  const FunctionSeq fs = bolthausen_seq(p, q);
  const std::vector<double> zero(n, 0.0);
  run.u = amp_run(a, zero, fs, depth);

  run.identity_deviation.assign(depth + 1, 0.0);
  for (std::size_t k = 0; k <= depth; ++k) {
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dev = std::max(dev, std::abs(run.m.levels[k][i] - fs(k, run.u.levels[k][i])));
    }
    run.identity_deviation[k] = dev;
    if (!(dev <= 1e-10)) {
      std::ostringstream msg;
      msg << "bolthausen_run: m^[" << k << "] deviates from f_k(u^[" << k << "]) by " << dev;
      throw ConsistencyError(msg.str());
    }
  }
  return run;
}

}  // namespace sklab
