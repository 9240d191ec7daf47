#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "sklab/scalar.hpp"

namespace sklab {

/// A sequence of scalar denoisers f_0, f_1, ... with analytic derivatives.
///
/// `constant(k)` reports the value when f_k is a constant function; the cavity
/// engine uses this to evaluate the level built from f_k without a table.
class FunctionSeq {
 public:
  using Fn = std::function<double(std::size_t, double)>;
  using ConstantFn = std::function<std::optional<double>(std::size_t)>;

  FunctionSeq(std::string tag, Fn eval, Fn deriv, ConstantFn constant = {});

  double operator()(std::size_t k, double x) const { return eval_(k, x); }
  double derivative(std::size_t k, double x) const { return deriv_(k, x); }
  std::optional<double> constant(std::size_t k) const {
    return constant_ ? constant_(k) : std::nullopt;
  }
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
  Fn eval_;
  Fn deriv_;
  ConstantFn constant_;
};

/// f_k = 0 for every k.
FunctionSeq zero_seq();

/// f_k = c for every k.
FunctionSeq constant_seq(double c);

/// f_k(x) = tanh(gain * x + offset) for every k.
FunctionSeq tanh_seq(double gain = 1.0, double offset = 0.0);

/// f_0 = 0, f_1 = sqrt(q), f_k(x) = tanh(beta x + h) for k >= 2.  With u = 0
/// the AMP iterates satisfy m^[k] = f_k(u^[k]) for Bolthausen's TAP scheme.
FunctionSeq bolthausen_seq(const ModelParams& p, double q);

}  // namespace sklab
