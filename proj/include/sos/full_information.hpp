#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "sos/filter.hpp"
#include "sos/learning_economy.hpp"
#include "sos/random.hpp"

namespace sos::fi {

// Benchmark economy in which investors observe the volatility state. Returns
// are then conditionally Gaussian given the state transition (i -> j):
//   r | (i -> j)  ~  N( ln((1+Q_j)/Q_i) + g_d - r_f - sigma_j^2/2, sigma_j^2 )
// and the exact likelihood follows from a finite-state filter.
struct FIParams {
  double m0 = 1.7;
  double gamma_kbar = 0.06;
  double b = 2.0;
  int kbar = 3;

  double g_c = 0.000075;
  double g_d = 0.000092;
  double r_f = 0.000042;
  double sigma_c = 0.00189;
  double sigma_d_bar = 0.0070;
  double rho_cd = 0.6;
  double q_bar = 6000.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();

  int n_states() const noexcept { return 1 << kbar; }
  bool has_alpha() const noexcept { return std::isfinite(alpha); }
  void validate() const;

  static FIParams from_structural(const econ::StructuralParams& p);
  econ::StructuralParams to_structural(double sigma_delta = 1.0) const;
};

FIParams calibrate(FIParams p);

// Precomputed transition/volatility/price tables for one parameter point.
class FIModel {
 public:
  explicit FIModel(const FIParams& p);
  const FIParams& params() const noexcept { return p_; }
  const Eigen::MatrixXd& transition() const noexcept { return trans_; }
  const Eigen::VectorXd& volatilities() const noexcept { return sigma_; }
  const Eigen::VectorXd& pd() const noexcept { return pd_; }
  double mean(int i, int j) const { return mu_(i, j); }
  double density(int i, int j, double r) const;

 private:
  FIParams p_;
  Eigen::MatrixXd trans_;
  Eigen::VectorXd sigma_;
  Eigen::VectorXd pd_;
  Eigen::MatrixXd mu_;  // mu_(i,j)
};

double fi_density(int i, int j, double r, const FIParams& p);

struct FIFilterResult {
  double loglik = 0.0;
  Eigen::VectorXd increments;  // predictive density of each observation
  Eigen::MatrixXd posterior;   // T x d; row t = P(state | r_1..r_{t+1})
};

// Exact likelihood recursion from a uniform initial state distribution.
FIFilterResult fi_filter(const Eigen::VectorXd& returns, const FIParams& p);

// Unconstrained coordinates for the estimated block:
// (logit(m0-1), logit(gamma_kbar), ln(b-1)).
Eigen::Vector3d to_unconstrained(const FIParams& p);
FIParams from_unconstrained(const Eigen::Vector3d& zeta, const FIParams& tmpl);

struct FIMleOptions {
  int starts = 5;           // 1 start from the template, rest jittered
  std::uint64_t seed = 0;   // drives the jitter only
  int max_evals = 400;      // per start
  double ftol = 1e-8;
  double xtol = 1e-6;
};

struct FIStartReport {
  Eigen::Vector3d start;
  double loglik = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct FIMleResult {
  FIParams params;
  double loglik = 0.0;
  std::vector<FIStartReport> starts;
  int best_start = 0;
};

// Maximum likelihood for (m0, gamma_kbar, b) with the calibrated block and
// kbar taken from the template.
FIMleResult fi_mle(const Eigen::VectorXd& returns, const FIParams& tmpl,
                   const FIMleOptions& opts = {});

// Per-observation score of the log-likelihood in unconstrained coordinates,
// by central differences of the filter increments. The point must be interior.
Eigen::MatrixXd fi_score(const Eigen::VectorXd& returns, const FIParams& at,
                         double step = 1e-5);

// Simulates excess returns from the observed-state economy.
Eigen::VectorXd simulate_returns(const FIParams& p, long t_max,
                                 std::uint64_t seed);

// State-observation sampler over the state index, for filtering the
// observed-state economy with the kernel particle filter.
std::unique_ptr<StateModel<int>> as_state_model(const FIParams& p);

}  // namespace sos::fi
