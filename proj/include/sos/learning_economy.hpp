#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "sos/filter.hpp"
#include "sos/random.hpp"

namespace sos::econ {

// The nature state space is 2^kbar; beliefs are stored inline up to 16
// entries, which caps kbar at 4.
inline constexpr int kMaxComponents = 4;

// Steps simulated from a uniform belief before a path (or a prior particle)
// is considered to have reached the ergodic joint law of state and belief.
inline constexpr long kBeliefBurnIn = 1000;

using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 16, 1>;
using SignalVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 6, 1>;

// Asset-pricing economy with a hidden multifrequency volatility state.
// Components switch independently: component k redraws with probability
// gamma_k = 1 - (1-gamma_kbar)^(b^(k-kbar)), taking value m0 or 2-m0
// equiprobably. Investors never see the state; they update a belief from
// dividend growth, consumption growth and kbar noisy state signals, and
// prices follow from that belief.
struct StructuralParams {
  // Estimated block.
  double m0 = 1.7;
  double gamma_kbar = 0.06;
  double b = 2.0;
  double sigma_delta = 1.0;
  int kbar = 3;

  // Calibrated block, all rates per period.
  double g_c = 0.000075;       // consumption growth
  double g_d = 0.000092;       // dividend growth
  double r_f = 0.000042;       // risk-free rate
  double sigma_c = 0.00189;    // consumption volatility
  double sigma_d_bar = 0.0070; // dividend volatility at multiplier one
  double rho_cd = 0.6;         // consumption/dividend shock correlation
  double q_bar = 6000.0;       // target mean price-dividend ratio
  // Risk aversion; NaN until calibrate() or an explicit assignment sets it.
  double alpha = std::numeric_limits<double>::quiet_NaN();

  int n_states() const noexcept { return 1 << kbar; }
  int n_signals() const noexcept { return kbar + 2; }
  bool has_alpha() const noexcept { return std::isfinite(alpha); }
  void validate() const;
};

// Volatility state, encoded as a bit per component: bit k-1 set means
// component k currently equals m0, clear means 2-m0.
struct NatureState {
  std::uint16_t index = 0;
};

double multiplier(const NatureState& s, int k, const StructuralParams& p);
Eigen::VectorXd multiplier_vector(int state_index, const StructuralParams& p);

struct EconomyState {
  NatureState nature;
  StateVec belief;
};

// gamma_1..gamma_kbar (slowest to fastest component).
Eigen::VectorXd component_switch_probs(const StructuralParams& p);

// Row-stochastic symmetric transition matrix over the 2^kbar states.
Eigen::MatrixXd transition_matrix(const StructuralParams& p);

// Dividend volatility per state: sigma_d_bar * sqrt(product of multipliers).
Eigen::VectorXd state_volatilities(const StructuralParams& p);

// Price-dividend ratio per nature state under full information pricing;
// requires alpha. Throws DivergentPriceError when the discounted dividend
// series fails to converge.
Eigen::VectorXd pd_coefficients(const StructuralParams& p);

// Risk aversion such that the mean price-dividend ratio over the (uniform)
// stationary state distribution equals q_bar. Requires rho_cd * sigma_c > 0
// so that prices decrease in alpha.
double solve_alpha(const StructuralParams& p, double q_bar);

// Convenience: returns p with alpha solved for p.q_bar.
StructuralParams calibrate(StructuralParams p);

struct StepResult {
  EconomyState state;
  SignalVec signal;
  double log_excess_return = 0.0;
};

// Precomputed engine for repeated simulation and belief updating.
class LearningEconomy {
 public:
  explicit LearningEconomy(const StructuralParams& p);

  const StructuralParams& params() const noexcept { return p_; }
  const Eigen::MatrixXd& transition() const noexcept { return trans_; }
  const Eigen::VectorXd& volatilities() const noexcept { return sigma_; }
  const Eigen::VectorXd& pd() const noexcept { return pd_; }

  NatureState transition_nature(NatureState prev, RandomStream& rng) const;

  // Signal vector (x1 dividend growth, x2 consumption growth, then kbar
  // noisy multiplier readings) given the current nature state.
  SignalVec sample_signal(NatureState current, RandomStream& rng) const;

  double signal_logdensity(const SignalVec& x, int state_index) const;
  double signal_density(const SignalVec& x, int state_index) const;

  // Bayes update of the belief through one transition and one signal.
  StateVec update_belief(const StateVec& prior, const SignalVec& x) const;

  double price_dividend(const StateVec& belief) const;

  // r = ln((1+Q(belief_now))/Q(belief_prev)) + x1 - r_f.
  double log_excess_return(double x1, double q_now, double q_prev) const;

  // One period: nature switch, signal draw, belief update, return.
  StepResult step(const EconomyState& prev, RandomStream& rng) const;

  EconomyState initial_state(RandomStream& rng) const;  // uniform nature/belief
  EconomyState ergodic_state(RandomStream& rng) const;  // after burn-in

 private:
  StructuralParams p_;
  Eigen::MatrixXd trans_;
  Eigen::MatrixXd trans_t_;   // transposed, for belief prediction
  Eigen::VectorXd sigma_;
  Eigen::VectorXd pd_;
  Eigen::VectorXd gamma_;
  // Per-state signal-density precomputations.
  StateVec mu1_, inv_sigma_, log_const_, m_sq_;
  Eigen::MatrixXd m_mat_;     // d x kbar multiplier table
  double s2_ = 0.0;           // conditional sd of x2 given x1
};

struct SimulatedPath {
  std::vector<int> nature_index;
  Eigen::VectorXd q_nature;   // price-dividend of the realized nature state
  Eigen::VectorXd q_belief;   // price-dividend under the investor belief
  Eigen::VectorXd returns;    // excess log returns
  long size() const noexcept { return static_cast<long>(nature_index.size()); }
};

// Simulates t_max periods. Without s0 the path starts from a uniform draw
// followed by kBeliefBurnIn discarded steps; with s0 it starts there directly.
SimulatedPath simulate_path(const StructuralParams& p, long t_max,
                            std::uint64_t seed,
                            const std::optional<EconomyState>& s0 = {});

// Returns-only variant for long estimation paths.
Eigen::VectorXd simulate_returns(const StructuralParams& p, long t_max,
                                 std::uint64_t seed);

// Adapter used by the particle filter: state = (nature, belief), observation
// = excess log return. The prior sampler runs the ergodic burn-in.
std::unique_ptr<StateModel<EconomyState>> as_state_model(
    const StructuralParams& p);

}  // namespace sos::econ
