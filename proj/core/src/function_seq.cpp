#include "sklab/function_seq.hpp"

#include <cmath>
#include <sstream>

#include "sklab/error.hpp"

namespace sklab {

FunctionSeq::FunctionSeq(std::string tag, Fn eval, Fn deriv, ConstantFn constant)
    : tag_(std::move(tag)),
      eval_(std::move(eval)),
      deriv_(std::move(deriv)),
      constant_(std::move(constant)) {
  if (!eval_ || !deriv_) throw DomainError("FunctionSeq: eval and deriv are required");
}

FunctionSeq zero_seq() { return constant_seq(0.0); }

FunctionSeq constant_seq(double c) {
  std::ostringstream tag;
  tag << "constant(" << c << ")";
  return FunctionSeq(
      c == 0.0 ? std::string("zero") : tag.str(), [c](std::size_t, double) { return c; },
      [](std::size_t, double) { return 0.0; },
      [c](std::size_t) { return std::optional<double>(c); });
}

FunctionSeq tanh_seq(double gain, double offset) {
  std::ostringstream tag;
  tag << "tanh(" << gain << "*x+" << offset << ")";
  return FunctionSeq(
      tag.str(), [gain, offset](std::size_t, double x) { return std::tanh(gain * x + offset); },
      [gain, offset](std::size_t, double x) {
        const double c = std::cosh(gain * x + offset);
        return gain / (c * c);
      });
}

FunctionSeq bolthausen_seq(const ModelParams& p, double q) {
  const double beta = p.beta;
  const double h = p.h;
  const double sq = std::sqrt(std::max(q, 0.0));
  return FunctionSeq(
      "bolthausen",
      [beta, h, sq](std::size_t k, double x) {
        if (k == 0) return 0.0;
        if (k == 1) return sq;
        return std::tanh(beta * x + h);
      },
      [beta, h](std::size_t k, double x) {
        if (k < 2) return 0.0;
        const double c = std::cosh(beta * x + h);
        return beta / (c * c);
      },
      [sq](std::size_t k) -> std::optional<double> {
        if (k == 0) return 0.0;
        if (k == 1) return sq;
        return std::nullopt;
      });
}

}  // namespace sklab
