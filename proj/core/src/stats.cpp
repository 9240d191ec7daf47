#include "sklab/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "sklab/error.hpp"

namespace sklab {

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.count = xs.size();
  if (xs.empty()) return out;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  out.mean = mean;
  if (k > 1) {
    out.sd = std::sqrt(m2 / static_cast<double>(k - 1));
    out.se = out.sd / std::sqrt(static_cast<double>(k));
  }
  return out;
}

SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("loglog_fit: need at least two (x, y) pairs of equal length");
  }
  const std::size_t m = x.size();
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_fit: values must be positive");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double md = static_cast<double>(m);
  const double mx = sx / md;
  const double my = sy / md;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw DomainError("loglog_fit: x values must not all coincide");
  SlopeFit fit;
  fit.points = m;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / (md - 2.0) / sxx);
    const boost::math::students_t dist(md - 2.0);
    fit.half_width = boost::math::quantile(dist, 0.975) * fit.slope_se;
  } else {
    fit.slope_se = std::numeric_limits<double>::quiet_NaN();
    fit.half_width = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

}  // namespace sklab
