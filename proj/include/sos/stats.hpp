#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

namespace sos {

inline constexpr double kSqrt2Pi = 2.5066282746310002;

double normal_pdf(double x);
double normal_logpdf(double x, double mean, double sd);
double normal_cdf(double x);

// Compensated (Kahan) summation; used wherever a sum feeds a normalization.
double kahan_sum(std::span<const double> xs);
double kahan_sum(const Eigen::VectorXd& xs);

// Lower-middle order statistic for even sizes, so that the sign-based score
// sum(sign(x - median)) always lies in {-1, 0, 1}.
double median_lower(std::vector<double> xs);

// Median absolute deviation about median_lower, same convention.
double mad(std::vector<double> xs);

// Quantile with linear interpolation between order statistics
// (the common "type 7" rule). p in [0,1]; xs need not be sorted.
double quantile_interpolated(std::vector<double> xs, double p);

// Least-squares slope of y on x; used for log-log convergence-rate checks.
double fit_slope(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // denominator n-1

}  // namespace sos
