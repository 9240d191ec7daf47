#pragma once

#include <cstddef>
#include <span>

namespace sklab {

struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 denominator)
  double se = 0.0;  // sd / sqrt(count)
  std::size_t count = 0;
};

MeanSe mean_se(std::span<const double> xs);

/// Unweighted least squares of log(y) on log(x).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  /// 95% Student-t half-width of the slope; NaN with fewer than three points.
  double half_width = 0.0;
  std::size_t points = 0;
};

/// Requires at least two points with x, y > 0.
SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace sklab
