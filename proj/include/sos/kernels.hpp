#pragma once

#include <Eigen/Core>
#include <limits>
#include <string_view>
#include <utility>

namespace sos {

enum class KernelFamily { gaussian, quasi_cauchy };

// Importance kernel used to weight state/pseudo-observation pairs. Admissible
// kernels integrate to one, have zero mean, finite second moment
// A(K) = integral of |u|^2 K(u), and finite squared mass B(K) = integral of
// K(u)^2. The scaled form is K_h(r) = h^-dim K(r/h).
class Kernel {
 public:
  // Product of standard normal densities in `dim` coordinates.
  static Kernel gaussian(int dim = 1);
  // One-dimensional kernel proportional to (1+u^2)^-2. Its polynomial tail
  // keeps importance weights stable when an observation lands far from the
  // cloud of pseudo-observations.
  static Kernel quasi_cauchy();
  static Kernel from_name(std::string_view name, int dim = 1);

  KernelFamily family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  std::string_view name() const noexcept;

  // Closed-form constants; kernel_constants() checks them by quadrature.
  double second_moment() const noexcept { return a_; }
  double squared_mass() const noexcept { return b_; }

  double operator()(const Eigen::VectorXd& u) const;
  double density1(double u) const;  // dim()==1 fast path

  double scaled(double h, const Eigen::VectorXd& diff) const;
  double scaled1(double h, double diff) const;

  // K_h applied row-wise to a matrix of differences (n x dim).
  Eigen::VectorXd scaled_batch(double h, const Eigen::MatrixXd& diffs) const;

 private:
  Kernel(KernelFamily fam, int dim, double a, double b)
      : family_(fam), dim_(dim), a_(a), b_(b) {}
  KernelFamily family_;
  int dim_;
  double a_, b_;
};

// (A(K), B(K)) by double-exponential quadrature, independent of the stored
// constants. Throws AssumptionViolation when the quadrature does not converge,
// which is how an inadmissible kernel would surface.
std::pair<double, double> kernel_constants(const Kernel& kernel);

// How the per-step bandwidth is chosen.
//  fixed:          h = h1 at every step and particle count.
//  power_law:      h = h1 * N^exponent, with -1/dim < exponent < 0 required
//                  so that bias and variance both vanish as N grows
//                  (default exponent -1/(dim+4), the rate-optimal choice).
//  adaptive_scale: h = multiplier * scale * N^(-1/(dim+4)) where scale is a
//                  robust spread (1.4826 * MAD) of the current
//                  pseudo-observations.
struct BandwidthPolicy {
  enum class Mode { fixed, power_law, adaptive_scale };
  Mode mode = Mode::adaptive_scale;
  double h1 = 1.0;
  double exponent = 0.0;  // 0 means "use default -1/(dim+4)"
  double scale_multiplier = 1.0;

  static BandwidthPolicy fixed(double h);
  static BandwidthPolicy power_law(double h1, double exponent = 0.0);
  static BandwidthPolicy adaptive_scale(double multiplier = 1.0);
  static BandwidthPolicy from_name(std::string_view name);
};

// Resolves the policy to a concrete bandwidth. `scale` is only consulted in
// adaptive_scale mode and must then be a positive finite number.
double bandwidth_value(const BandwidthPolicy& policy, int obs_dim,
                       double n_particles,
                       double scale = std::numeric_limits<double>::quiet_NaN());

// Coefficient h(1) of the bandwidth sequence h(N) = h(1) * N^(-1/(dim+4))
// minimizing the asymptotic mean squared error bound of the likelihood
// estimator, given a bound kappa on the predictive density and kappa_prime on
// its curvature.
double optimal_power_law_h1(double kappa, double kappa_prime,
                            const Kernel& kernel);

}  // namespace sos
