#include "sos/kernels.hpp"

#include <cmath>
#include <string>

#include "sos/errors.hpp"
#include "sos/quadrature.hpp"

namespace sos {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kTwoOverPi = 0.6366197723675814;

double gaussian_norm_const(int dim) {
  return std::pow(kInvSqrt2Pi, dim);
}

void require_positive_h(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidArgument("kernel: bandwidth must be positive and finite");
}

}  // namespace

Kernel Kernel::gaussian(int dim) {
  if (dim < 1) throw InvalidArgument("Kernel::gaussian: dim must be >= 1");
  // A = dim (one unit of variance per coordinate); B = (2 sqrt(pi))^-dim.
  const double b = std::pow(1.0 / (2.0 * std::sqrt(M_PI)), dim);
  return Kernel(KernelFamily::gaussian, dim, static_cast<double>(dim), b);
}

Kernel Kernel::quasi_cauchy() {
  // A = 1 exactly; B = 5/(4 pi).
  return Kernel(KernelFamily::quasi_cauchy, 1, 1.0, 5.0 / (4.0 * M_PI));
}

Kernel Kernel::from_name(std::string_view name, int dim) {
  if (name == "gaussian") return gaussian(dim);
  if (name == "quasi_cauchy") {
    if (dim != 1)
      throw ConfigError("kernel quasi_cauchy supports one dimension only");
    return quasi_cauchy();
  }
  throw ConfigError("unknown kernel '" + std::string(name) +
                    "' (expected gaussian or quasi_cauchy)");
}

std::string_view Kernel::name() const noexcept {
  return family_ == KernelFamily::gaussian ? "gaussian" : "quasi_cauchy";
}

double Kernel::operator()(const Eigen::VectorXd& u) const {
  if (u.size() != dim_)
    throw InvalidArgument("kernel: argument dimension mismatch");
  if (family_ == KernelFamily::gaussian)
    return gaussian_norm_const(dim_) * std::exp(-0.5 * u.squaredNorm());
  const double q = 1.0 + u(0) * u(0);
  return kTwoOverPi / (q * q);
}

double Kernel::density1(double u) const {
  if (family_ == KernelFamily::gaussian)
    return kInvSqrt2Pi * std::exp(-0.5 * u * u);
  const double q = 1.0 + u * u;
  return kTwoOverPi / (q * q);
}

double Kernel::scaled(double h, const Eigen::VectorXd& diff) const {
  require_positive_h(h);
  if (diff.size() != dim_)
    throw InvalidArgument("kernel: argument dimension mismatch");
  if (dim_ == 1) return density1(diff(0) / h) / h;
  return (*this)(diff / h) / std::pow(h, dim_);
}

double Kernel::scaled1(double h, double diff) const {
  require_positive_h(h);
  return density1(diff / h) / h;
}

Eigen::VectorXd Kernel::scaled_batch(double h,
                                     const Eigen::MatrixXd& diffs) const {
  require_positive_h(h);
  if (diffs.cols() != dim_)
    throw InvalidArgument("kernel: argument dimension mismatch");
  const double inv_h2 = 1.0 / (h * h);
  if (family_ == KernelFamily::gaussian) {
    const double c = gaussian_norm_const(dim_) / std::pow(h, dim_);
    return (diffs.rowwise().squaredNorm().array() * (-0.5 * inv_h2)).exp() * c;
  }
  const Eigen::ArrayXd q = 1.0 + diffs.col(0).array().square() * inv_h2;
  return (kTwoOverPi / h) / (q * q);
}

std::pair<double, double> kernel_constants(const Kernel& kernel) {
  auto check = [](const QuadratureResult& r, const char* what) {
    if (!r.converged)
      throw AssumptionViolation(std::string("kernel_constants: quadrature for ") +
                                what + " did not converge");
    return r.value;
  };
  if (kernel.dim() == 1) {
    const double a = check(
        integrate_real_line([&](double u) { return u * u * kernel.density1(u); }),
        "second moment");
    const double b = check(
        integrate_real_line(
            [&](double u) { const double k = kernel.density1(u); return k * k; }),
        "squared mass");
    return {a, b};
  }
  if (kernel.dim() == 2) {
    auto at = [&](double x, double y) {
      Eigen::VectorXd u(2);
      u << x, y;
      return kernel(u);
    };
    const double a = check(integrate_plane([&](double x, double y) {
                             return (x * x + y * y) * at(x, y);
                           }),
                           "second moment");
    const double b = check(integrate_plane([&](double x, double y) {
                             const double k = at(x, y);
                             return k * k;
                           }),
                           "squared mass");
    return {a, b};
  }
  // Higher dimensions: exploit the product structure coordinate-wise.
  const Kernel axis = Kernel::gaussian(1);
  const double m2 = check(
      integrate_real_line([&](double u) { return u * u * axis.density1(u); }),
      "second moment");
  const double b1 = check(
      integrate_real_line(
          [&](double u) { const double k = axis.density1(u); return k * k; }),
      "squared mass");
  return {kernel.dim() * m2, std::pow(b1, kernel.dim())};
}

BandwidthPolicy BandwidthPolicy::fixed(double h) {
  require_positive_h(h);
  BandwidthPolicy p;
  p.mode = Mode::fixed;
  p.h1 = h;
  return p;
}

BandwidthPolicy BandwidthPolicy::power_law(double h1, double exponent) {
  require_positive_h(h1);
  BandwidthPolicy p;
  p.mode = Mode::power_law;
  p.h1 = h1;
  p.exponent = exponent;
  return p;
}

BandwidthPolicy BandwidthPolicy::adaptive_scale(double multiplier) {
  if (!(multiplier > 0.0))
    throw InvalidArgument("bandwidth: multiplier must be positive");
  BandwidthPolicy p;
  p.mode = Mode::adaptive_scale;
  p.scale_multiplier = multiplier;
  return p;
}

BandwidthPolicy BandwidthPolicy::from_name(std::string_view name) {
  BandwidthPolicy p;
  if (name == "fixed") p.mode = Mode::fixed;
  else if (name == "power_law") p.mode = Mode::power_law;
  else if (name == "adaptive_scale") p.mode = Mode::adaptive_scale;
  else
    throw ConfigError("unknown bandwidth mode '" + std::string(name) +
                      "' (expected fixed, power_law or adaptive_scale)");
  return p;
}

double bandwidth_value(const BandwidthPolicy& policy, int obs_dim,
                       double n_particles, double scale) {
  if (obs_dim < 1) throw InvalidArgument("bandwidth: obs_dim must be >= 1");
  if (!(n_particles >= 1.0))
    throw InvalidArgument("bandwidth: particle count must be >= 1");
  const double default_exp = -1.0 / (obs_dim + 4);
  switch (policy.mode) {
    case BandwidthPolicy::Mode::fixed:
      require_positive_h(policy.h1);
      return policy.h1;
    case BandwidthPolicy::Mode::power_law: {
      require_positive_h(policy.h1);
      const double e = policy.exponent == 0.0 ? default_exp : policy.exponent;
      if (!(e < 0.0) || !(e > -1.0 / obs_dim))
        throw InvalidArgument(
            "bandwidth: power-law exponent must lie in (-1/dim, 0)");
      return policy.h1 * std::pow(n_particles, e);
    }
    case BandwidthPolicy::Mode::adaptive_scale: {
      if (!(scale > 0.0) || !std::isfinite(scale))
        throw InvalidArgument(
            "bandwidth: adaptive mode needs a positive finite scale");
      return policy.scale_multiplier * scale *
             std::pow(n_particles, default_exp);
    }
  }
  throw InvalidArgument("bandwidth: unknown mode");
}

double optimal_power_law_h1(double kappa, double kappa_prime,
                            const Kernel& kernel) {
  if (!(kappa > 0.0) || !(kappa_prime > 0.0))
    throw InvalidArgument("optimal_power_law_h1: bounds must be positive");
  const int d = kernel.dim();
  const double a = kernel.second_moment();
  const double b = kernel.squared_mass();
  const double num = kappa * d * b;
  const double den = 8.0 * kappa_prime * kappa_prime * a * a;
  return std::pow(num / den, 1.0 / (d + 4));
}

}  // namespace sos
