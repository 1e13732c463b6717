#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>

namespace sos {

struct NelderMeadOptions {
  int max_evals = 4000;
  double ftol = 1e-10;   // spread of simplex values
  double xtol = 1e-9;    // spread of simplex vertices (inf-norm)
  // Stop as soon as the best value reaches this level; lets callers cut
  // simulated objectives short once they hit their known floor.
  double target_f = -std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer with the standard reflection/expansion/
// contraction/shrink moves. Fully deterministic for a given start.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& init_step,
                             const NelderMeadOptions& opts = {});

// Brent root finder on a sign-changing bracket [a,b].
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double xtol = 1e-12, int max_iter = 200);

}  // namespace sos
