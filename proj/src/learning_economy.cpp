#include "sos/learning_economy.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <string>

#include "sos/errors.hpp"
#include "sos/log.hpp"
#include "sos/optim.hpp"
#include "sos/stats.hpp"

namespace sos::econ {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

void StructuralParams::validate() const {
  if (kbar < 1 || kbar > kMaxComponents)
    throw InvalidArgument("params: kbar must lie in [1," +
                          std::to_string(kMaxComponents) + "]");
  if (!(m0 >= 1.0) || !(m0 < 2.0))
    throw InvalidArgument("params: m0 must lie in [1,2)");
  if (!(gamma_kbar > 0.0) || !(gamma_kbar <= 1.0))
    throw InvalidArgument("params: gamma_kbar must lie in (0,1]");
  if (!(b >= 1.0))
    throw InvalidArgument("params: b must be >= 1");
  if (!(sigma_delta >= 0.0))
    throw InvalidArgument("params: sigma_delta must be >= 0");
  if (!(sigma_c > 0.0) || !(sigma_d_bar > 0.0))
    throw InvalidArgument("params: volatilities must be positive");
  if (!(rho_cd >= -1.0) || !(rho_cd <= 1.0))
    throw InvalidArgument("params: rho_cd must lie in [-1,1]");
  if (!(q_bar > 0.0))
    throw InvalidArgument("params: q_bar must be positive");
}

double multiplier(const NatureState& s, int k, const StructuralParams& p) {
  if (k < 1 || k > p.kbar)
    throw InvalidArgument("multiplier: component out of range");
  return (s.index >> (k - 1)) & 1 ? p.m0 : 2.0 - p.m0;
}

Eigen::VectorXd multiplier_vector(int state_index, const StructuralParams& p) {
  Eigen::VectorXd m(p.kbar);
  for (int k = 1; k <= p.kbar; ++k)
    m(k - 1) = (state_index >> (k - 1)) & 1 ? p.m0 : 2.0 - p.m0;
  return m;
}

Eigen::VectorXd component_switch_probs(const StructuralParams& p) {
  p.validate();
  Eigen::VectorXd g(p.kbar);
  for (int k = 1; k <= p.kbar; ++k)
    g(k - 1) = 1.0 - std::pow(1.0 - p.gamma_kbar,
                              std::pow(p.b, static_cast<double>(k - p.kbar)));
  return g;
}

Eigen::MatrixXd transition_matrix(const StructuralParams& p) {
  const Eigen::VectorXd g = component_switch_probs(p);
  const int d = p.n_states();
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double prod = 1.0;
      for (int k = 0; k < p.kbar; ++k) {
        const bool same = ((i >> k) & 1) == ((j >> k) & 1);
        prod *= same ? 1.0 - 0.5 * g(k) : 0.5 * g(k);
      }
      a(i, j) = prod;
    }
  return a;
}

Eigen::VectorXd state_volatilities(const StructuralParams& p) {
  p.validate();
  const int d = p.n_states();
  Eigen::VectorXd s(d);
  for (int j = 0; j < d; ++j) {
    double prod = 1.0;
    for (int k = 0; k < p.kbar; ++k)
      prod *= (j >> k) & 1 ? p.m0 : 2.0 - p.m0;
    s(j) = p.sigma_d_bar * std::sqrt(prod);
  }
  return s;
}

Eigen::VectorXd pd_coefficients(const StructuralParams& p) {
  if (!p.has_alpha())
    throw InvalidArgument("pd_coefficients: alpha is not set; calibrate first");
  const int d = p.n_states();
  const Eigen::MatrixXd a = transition_matrix(p);
  const Eigen::VectorXd sig = state_volatilities(p);
  Eigen::MatrixXd bmat(d, d);
  for (int j = 0; j < d; ++j) {
    const double e =
        std::exp(p.g_d - p.r_f - p.alpha * p.rho_cd * p.sigma_c * sig(j));
    bmat.col(j) = a.col(j) * e;
  }
  const double radius = bmat.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0))
    throw DivergentPriceError(
        "pd_coefficients: discounted dividend series diverges (spectral "
        "radius " +
        std::to_string(radius) + ")");
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(d, d) - bmat;
  const Eigen::VectorXd q =
      lhs.partialPivLu().solve(Eigen::VectorXd::Ones(d)) -
      Eigen::VectorXd::Ones(d);
  if (!(q.minCoeff() > 0.0))
    throw DivergentPriceError("pd_coefficients: nonpositive price-dividend");
  return q;
}

double solve_alpha(const StructuralParams& p, double q_bar) {
  p.validate();
  if (!(q_bar > 0.0))
    throw InvalidArgument("solve_alpha: q_bar must be positive");
  if (!(p.rho_cd * p.sigma_c > 0.0))
    throw InvalidArgument(
        "solve_alpha: needs rho_cd * sigma_c > 0 for a price that decreases "
        "in risk aversion");

  auto mean_pd = [&](double alpha) {
    StructuralParams q = p;
    q.alpha = alpha;
    try {
      return pd_coefficients(q).mean();
    } catch (const DivergentPriceError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // The mean ratio decreases from +inf (divergence at low risk aversion) to
  // zero, so scan a log grid for a sign change and polish with Brent.
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  double prev_alpha = std::numeric_limits<double>::quiet_NaN();
  double prev_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 160; ++i) {
    const double alpha = 1e-4 * std::pow(10.0, i * 0.05);  // up to 1e4
    const double val = mean_pd(alpha) - q_bar;
    if (std::isfinite(val) && val <= 0.0) {
      if (!std::isfinite(prev_val) || prev_val > 0.0) {
        if (std::isfinite(prev_val)) {
          lo = prev_alpha;
          hi = alpha;
        } else {
          // Divergent on the previous node: bisect toward the boundary to
          // find a finite positive value.
          double a = prev_alpha, bprime = alpha;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (a + bprime);
            const double v = mean_pd(mid) - q_bar;
            if (std::isfinite(v) && v > 0.0) {
              lo = mid;
              hi = bprime;
              break;
            }
            if (std::isfinite(v) && v <= 0.0) bprime = mid;
            else a = mid;
          }
        }
      }
      if (std::isfinite(lo)) break;
      // Entire finite region is below the target already at its left edge.
      throw CalibrationError(
          "solve_alpha: target mean price-dividend unattainable (too high "
          "for every stable alpha)");
    }
    prev_alpha = alpha;
    prev_val = val;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw CalibrationError("solve_alpha: failed to bracket the target");

  const double alpha = brent_root(
      [&](double a) {
        const double v = mean_pd(a) - q_bar;
        return std::isfinite(v) ? v : q_bar * 1e6;  // divergence acts as +inf
      },
      lo, hi, 1e-10 * std::max(1.0, hi));
  const double resid = mean_pd(alpha) - q_bar;
  if (!(std::abs(resid) <= 1e-6 * q_bar))
    throw CalibrationError("solve_alpha: residual " + std::to_string(resid) +
                           " exceeds tolerance");
  return alpha;
}

StructuralParams calibrate(StructuralParams p) {
  p.alpha = solve_alpha(p, p.q_bar);
  return p;
}

LearningEconomy::LearningEconomy(const StructuralParams& p) : p_(p) {
  p_.validate();
  if (!p_.has_alpha())
    throw InvalidArgument("LearningEconomy: alpha is not set; calibrate first");
  const int d = p_.n_states();
  gamma_ = component_switch_probs(p_);
  trans_ = transition_matrix(p_);
  trans_t_ = trans_.transpose();
  sigma_ = state_volatilities(p_);
  pd_ = pd_coefficients(p_);

  mu1_.resize(d);
  inv_sigma_.resize(d);
  log_const_.resize(d);
  m_sq_.resize(d);
  m_mat_.resize(d, p_.kbar);
  s2_ = p_.sigma_c * std::sqrt(1.0 - p_.rho_cd * p_.rho_cd);
  for (int j = 0; j < d; ++j) {
    mu1_(j) = p_.g_d - 0.5 * sigma_(j) * sigma_(j);
    inv_sigma_(j) = 1.0 / sigma_(j);
    const Eigen::VectorXd m = multiplier_vector(j, p_);
    m_mat_.row(j) = m.transpose();
    m_sq_(j) = m.squaredNorm();
    // Constant of the (kbar+2)-factor Gaussian density; the sigma_delta and
    // s2 pieces are only finite when those scales are positive, which the
    // density path checks before using them.
    double c = -0.5 * (p_.kbar + 2) * kLog2Pi - std::log(sigma_(j));
    if (s2_ > 0.0) c -= std::log(s2_);
    if (p_.sigma_delta > 0.0) c -= p_.kbar * std::log(p_.sigma_delta);
    log_const_(j) = c;
  }
}

NatureState LearningEconomy::transition_nature(NatureState prev,
                                               RandomStream& rng) const {
  std::uint16_t idx = prev.index;
  for (int k = 0; k < p_.kbar; ++k) {
    if (rng.uniform() < gamma_(k)) {
      const std::uint16_t bit = rng.uniform() < 0.5 ? 1 : 0;
      idx = static_cast<std::uint16_t>((idx & ~(1u << k)) | (bit << k));
    }
  }
  return NatureState{idx};
}

SignalVec LearningEconomy::sample_signal(NatureState current,
                                         RandomStream& rng) const {
  SignalVec x(p_.n_signals());
  const int j = current.index;
  double eps_d, eps_c;
  rng.correlated_normals(p_.rho_cd, eps_d, eps_c);
  x(0) = mu1_(j) + sigma_(j) * eps_d;
  x(1) = p_.g_c + p_.sigma_c * eps_c;
  for (int k = 0; k < p_.kbar; ++k)
    x(2 + k) = m_mat_(j, k) + p_.sigma_delta * rng.normal();
  return x;
}

double LearningEconomy::signal_logdensity(const SignalVec& x,
                                          int state_index) const {
  if (x.size() != p_.n_signals())
    throw InvalidArgument("signal_logdensity: signal dimension mismatch");
  if (state_index < 0 || state_index >= p_.n_states())
    throw InvalidArgument("signal_logdensity: state index out of range");
  if (!(s2_ > 0.0))
    throw DegenerateDensityError(
        "signal_logdensity: |rho_cd| = 1 makes the signal density singular");
  if (!(p_.sigma_delta > 0.0))
    throw DegenerateDensityError(
        "signal_logdensity: sigma_delta = 0 makes the signal density "
        "singular; beliefs then identify the state exactly");
  const int j = state_index;
  const double z1 = (x(0) - mu1_(j)) * inv_sigma_(j);
  const double m2 = p_.g_c + p_.rho_cd * p_.sigma_c * z1;
  const double z2 = (x(1) - m2) / s2_;
  double noise = 0.0;
  for (int k = 0; k < p_.kbar; ++k) {
    const double dz = (x(2 + k) - m_mat_(j, k)) / p_.sigma_delta;
    noise += dz * dz;
  }
  return log_const_(j) - 0.5 * (z1 * z1 + z2 * z2 + noise);
}

double LearningEconomy::signal_density(const SignalVec& x,
                                       int state_index) const {
  return std::exp(signal_logdensity(x, state_index));
}

StateVec LearningEconomy::update_belief(const StateVec& prior,
                                        const SignalVec& x) const {
  const int d = p_.n_states();
  if (prior.size() != d)
    throw InvalidArgument("update_belief: belief dimension mismatch");

  const StateVec predicted = trans_t_ * prior;

  StateVec logf(d);
  if (p_.sigma_delta > 0.0) {
    if (!(s2_ > 0.0))
      throw DegenerateDensityError(
          "update_belief: |rho_cd| = 1 makes the signal density singular");
    const double x1 = x(0), x2 = x(1);
    const auto xt = x.tail(p_.kbar);
    const double sx2 = xt.squaredNorm();
    const double inv_sd2 = 1.0 / (p_.sigma_delta * p_.sigma_delta);
    const StateVec z1 = (x1 - mu1_.array()).matrix().cwiseProduct(inv_sigma_);
    const StateVec m2 =
        (p_.g_c + p_.rho_cd * p_.sigma_c * z1.array()).matrix();
    const StateVec z2 = (x2 - m2.array()).matrix() / s2_;
    const StateVec cross = m_mat_ * xt.matrix();
    logf = log_const_ -
           0.5 * (z1.cwiseProduct(z1) + z2.cwiseProduct(z2) +
                  (sx2 - 2.0 * cross.array() + m_sq_.array()).matrix() *
                      inv_sd2);
  } else {
    // Noise-free signals identify the state exactly.
    int match = -1;
    for (int j = 0; j < d; ++j) {
      if ((x.tail(p_.kbar).transpose() - m_mat_.row(j)).cwiseAbs().maxCoeff() ==
          0.0) {
        match = j;
        break;
      }
    }
    if (match < 0)
      throw NumericError(
          "update_belief: noise-free signal matches no state exactly");
    if (!(predicted(match) > 0.0))
      throw NumericError(
          "update_belief: observed state has zero predictive probability");
    StateVec point = StateVec::Zero(d);
    point(match) = 1.0;
    return point;
  }

  const double shift = logf.maxCoeff();
  StateVec omega =
      (predicted.array() * (logf.array() - shift).exp()).matrix();
  const double total = omega.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericError("update_belief: posterior mass vanished");
  return omega / total;
}

double LearningEconomy::price_dividend(const StateVec& belief) const {
  if (belief.size() != pd_.size())
    throw InvalidArgument("price_dividend: belief dimension mismatch");
  return belief.dot(pd_);
}

double LearningEconomy::log_excess_return(double x1, double q_now,
                                          double q_prev) const {
  if (!(q_prev > 0.0))
    throw InvalidArgument("log_excess_return: previous ratio must be positive");
  return std::log((1.0 + q_now) / q_prev) + x1 - p_.r_f;
}

StepResult LearningEconomy::step(const EconomyState& prev,
                                 RandomStream& rng) const {
  StepResult out;
  out.state.nature = transition_nature(prev.nature, rng);
  out.signal = sample_signal(out.state.nature, rng);
  out.state.belief = update_belief(prev.belief, out.signal);
  const double q_prev = price_dividend(prev.belief);
  const double q_now = price_dividend(out.state.belief);
  out.log_excess_return = log_excess_return(out.signal(0), q_now, q_prev);
  return out;
}

EconomyState LearningEconomy::initial_state(RandomStream& rng) const {
  EconomyState s;
  std::uint16_t idx = 0;
  for (int k = 0; k < p_.kbar; ++k)
    if (rng.uniform() < 0.5) idx |= static_cast<std::uint16_t>(1u << k);
  s.nature.index = idx;
  s.belief =
      StateVec::Constant(p_.n_states(), 1.0 / static_cast<double>(p_.n_states()));
  return s;
}

EconomyState LearningEconomy::ergodic_state(RandomStream& rng) const {
  EconomyState s = initial_state(rng);
  for (long t = 0; t < kBeliefBurnIn; ++t) s = step(s, rng).state;
  return s;
}

SimulatedPath simulate_path(const StructuralParams& p, long t_max,
                            std::uint64_t seed,
                            const std::optional<EconomyState>& s0) {
  if (t_max < 1) throw InvalidArgument("simulate_path: t_max must be >= 1");
  const LearningEconomy econ(p);
  RandomStream rng(seed, 0, 0);
  EconomyState s = s0 ? *s0 : econ.ergodic_state(rng);
  if (s0 && s.belief.size() != p.n_states())
    throw InvalidArgument("simulate_path: s0 belief dimension mismatch");

  SimulatedPath path;
  path.nature_index.resize(static_cast<std::size_t>(t_max));
  path.q_nature.resize(t_max);
  path.q_belief.resize(t_max);
  path.returns.resize(t_max);
  for (long t = 0; t < t_max; ++t) {
    StepResult r = econ.step(s, rng);
    s = std::move(r.state);
    path.nature_index[static_cast<std::size_t>(t)] = s.nature.index;
    path.q_nature(t) = econ.pd()(s.nature.index);
    path.q_belief(t) = econ.price_dividend(s.belief);
    path.returns(t) = r.log_excess_return;
  }
  return path;
}

Eigen::VectorXd simulate_returns(const StructuralParams& p, long t_max,
                                 std::uint64_t seed) {
  if (t_max < 1) throw InvalidArgument("simulate_returns: t_max must be >= 1");
  const LearningEconomy econ(p);
  RandomStream rng(seed, 0, 0);
  EconomyState s = econ.ergodic_state(rng);
  Eigen::VectorXd ret(t_max);
  for (long t = 0; t < t_max; ++t) {
    StepResult r = econ.step(s, rng);
    s = std::move(r.state);
    ret(t) = r.log_excess_return;
  }
  return ret;
}

namespace {

class EconomyStateModel final : public StateModel<EconomyState> {
 public:
  explicit EconomyStateModel(const StructuralParams& p) : econ_(p) {}

  int obs_dim() const override { return 1; }

  EconomyState sample_prior(RandomStream& rng) const override {
    return econ_.ergodic_state(rng);
  }

  EconomyState sample_pair(const EconomyState& prev,
                           const ObservationHistory& /*history*/,
                           RandomStream& rng,
                           Eigen::Ref<Eigen::VectorXd> obs_out) const override {
    StepResult r = econ_.step(prev, rng);
    obs_out(0) = r.log_excess_return;
    return std::move(r.state);
  }

  const LearningEconomy& engine() const { return econ_; }

 private:
  LearningEconomy econ_;
};

}  // namespace

std::unique_ptr<StateModel<EconomyState>> as_state_model(
    const StructuralParams& p) {
  return std::make_unique<EconomyStateModel>(p);
}

}  // namespace sos::econ
