#pragma once

#include <cstddef>
#include <functional>

namespace sos {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

// Double-exponential quadrature. The change of variables pushes nodes toward
// the tails at a doubly exponential rate, so smooth integrands with algebraic
// or faster decay converge to near machine precision in a few refinements.
// Truncating at a fixed kernel-mass tail does not work here: a heavy-tailed
// kernel's second moment picks up non-negligible mass far beyond any density
// cutoff, while the transformed sum below handles it.
QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     double tol = 1e-12, int max_level = 12);

QuadratureResult integrate_interval(const std::function<double(double)>& f,
                                    double a, double b, double tol = 1e-12,
                                    int max_level = 12);

// Tensor-nested version for functions on the plane; used as an independent
// cross-check of product-kernel constants.
QuadratureResult integrate_plane(
    const std::function<double(double, double)>& f, double tol = 1e-9,
    int max_level = 9);

}  // namespace sos
