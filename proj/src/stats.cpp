#include "sos/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sos/errors.hpp"

namespace sos {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double normal_logpdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) throw InvalidArgument("normal_logpdf: sd must be positive");
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd * kSqrt2Pi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865476);
}

double kahan_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double kahan_sum(const Eigen::VectorXd& xs) {
  return kahan_sum(std::span<const double>(xs.data(),
                                           static_cast<std::size_t>(xs.size())));
}

double median_lower(std::vector<double> xs) {
  if (xs.empty()) throw InvalidArgument("median_lower: empty sample");
  const std::size_t k = (xs.size() - 1) / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k),
                   xs.end());
  return xs[k];
}

double mad(std::vector<double> xs) {
  const double med = median_lower(xs);
  for (double& x : xs) x = std::abs(x - med);
  return median_lower(std::move(xs));
}

double quantile_interpolated(std::vector<double> xs, double p) {
  if (xs.empty()) throw InvalidArgument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("quantile: p must lie in [0,1]");
  const std::size_t n = xs.size();
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(lo),
                   xs.end());
  const double xlo = xs[lo];
  if (hi == lo) return xlo;
  const double xhi =
      *std::min_element(xs.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                        xs.end());
  const double frac = pos - static_cast<double>(lo);
  return xlo + frac * (xhi - xlo);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("fit_slope: need two samples of equal size >= 2");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("mean: empty sample");
  return kahan_sum(xs) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidArgument("variance: need n >= 2");
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace sos
