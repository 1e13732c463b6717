#include "sos/full_information.hpp"

#include <cmath>
#include <string>

#include "sos/errors.hpp"
#include "sos/log.hpp"
#include "sos/stats.hpp"
#include "sos/optim.hpp"

namespace sos::fi {

namespace {

double logit(double u) { return std::log(u / (1.0 - u)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Interior clamp for boundary template values feeding the transforms.
double clamp_open(double u, double lo, double hi) {
  const double eps = 1e-9 * (hi - lo);
  return std::min(hi - eps, std::max(lo + eps, u));
}

}  // namespace

void FIParams::validate() const {
  to_structural(1.0).validate();
}

FIParams FIParams::from_structural(const econ::StructuralParams& p) {
  FIParams f;
  f.m0 = p.m0;
  f.gamma_kbar = p.gamma_kbar;
  f.b = p.b;
  f.kbar = p.kbar;
  f.g_c = p.g_c;
  f.g_d = p.g_d;
  f.r_f = p.r_f;
  f.sigma_c = p.sigma_c;
  f.sigma_d_bar = p.sigma_d_bar;
  f.rho_cd = p.rho_cd;
  f.q_bar = p.q_bar;
  f.alpha = p.alpha;
  return f;
}

econ::StructuralParams FIParams::to_structural(double sigma_delta) const {
  econ::StructuralParams p;
  p.m0 = m0;
  p.gamma_kbar = gamma_kbar;
  p.b = b;
  p.sigma_delta = sigma_delta;
  p.kbar = kbar;
  p.g_c = g_c;
  p.g_d = g_d;
  p.r_f = r_f;
  p.sigma_c = sigma_c;
  p.sigma_d_bar = sigma_d_bar;
  p.rho_cd = rho_cd;
  p.q_bar = q_bar;
  p.alpha = alpha;
  return p;
}

FIParams calibrate(FIParams p) {
  p.alpha = econ::solve_alpha(p.to_structural(1.0), p.q_bar);
  return p;
}

FIModel::FIModel(const FIParams& p) : p_(p) {
  p_.validate();
  if (!p_.has_alpha())
    throw InvalidArgument("FIModel: alpha is not set; calibrate first");
  const econ::StructuralParams sp = p_.to_structural(1.0);
  trans_ = econ::transition_matrix(sp);
  sigma_ = econ::state_volatilities(sp);
  pd_ = econ::pd_coefficients(sp);
  const int d = p_.n_states();
  mu_.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      mu_(i, j) = std::log((1.0 + pd_(j)) / pd_(i)) + p_.g_d - p_.r_f -
                  0.5 * sigma_(j) * sigma_(j);
}

double FIModel::density(int i, int j, double r) const {
  const int d = p_.n_states();
  if (i < 0 || i >= d || j < 0 || j >= d)
    throw InvalidArgument("fi_density: state index out of range");
  const double z = (r - mu_(i, j)) / sigma_(j);
  return std::exp(-0.5 * z * z) / (sigma_(j) * kSqrt2Pi);
}

double fi_density(int i, int j, double r, const FIParams& p) {
  return FIModel(p).density(i, j, r);
}

FIFilterResult fi_filter(const Eigen::VectorXd& returns, const FIParams& p) {
  const long t_max = returns.size();
  if (t_max < 1) throw InvalidArgument("fi_filter: empty observation set");
  const FIModel model(p);
  const int d = p.n_states();
  const Eigen::MatrixXd& a = model.transition();

  // Precompute the T x d^2 density table column-blocked by target state j so
  // each column is one vectorized Gaussian evaluation; column index j*d+i.
  Eigen::MatrixXd dens(t_max, d * d);
  for (int j = 0; j < d; ++j) {
    const double sd = model.volatilities()(j);
    const double norm = 1.0 / (sd * kSqrt2Pi);
    for (int i = 0; i < d; ++i)
      dens.col(j * d + i) =
          (((returns.array() - model.mean(i, j)) / sd).square() * -0.5)
              .exp() *
          norm;
  }

  FIFilterResult out;
  out.increments.resize(t_max);
  out.posterior.resize(t_max, d);
  Eigen::VectorXd prob = Eigen::VectorXd::Constant(d, 1.0 / d);
  Eigen::VectorXd next(d);
  double loglik = 0.0;
  for (long t = 0; t < t_max; ++t) {
    // v_ij = a_ij f_ij(r_t) p_i; increment = sum, posterior_j = colsum_j.
    double inc = 0.0;
    for (int j = 0; j < d; ++j) {
      double col = 0.0;
      for (int i = 0; i < d; ++i)
        col += a(i, j) * dens(t, j * d + i) * prob(i);
      next(j) = col;
      inc += col;
    }
    if (!(inc > 0.0) || !std::isfinite(inc)) {
      log::warn("fi_filter: predictive density underflow at step " +
                std::to_string(t + 1) + "; clipping");
      inc = std::numeric_limits<double>::min();
      next = a.transpose() * prob;  // fall back to the predictive law
    }
    prob = next / next.sum();
    out.increments(t) = inc;
    out.posterior.row(t) = prob.transpose();
    loglik += std::log(inc);
  }
  out.loglik = loglik;
  return out;
}

Eigen::Vector3d to_unconstrained(const FIParams& p) {
  Eigen::Vector3d z;
  z(0) = logit(clamp_open(p.m0 - 1.0, 0.0, 1.0));
  z(1) = logit(clamp_open(p.gamma_kbar, 0.0, 1.0));
  z(2) = std::log(std::max(p.b - 1.0, 1e-9));
  return z;
}

FIParams from_unconstrained(const Eigen::Vector3d& zeta, const FIParams& tmpl) {
  FIParams p = tmpl;
  // The logistic saturates to 0/1 in double precision for |z| beyond ~37;
  // clamp back into the open interval so every finite coordinate vector maps
  // to a valid interior parameter point (the optimizer may roam that far).
  p.m0 = 1.0 + clamp_open(sigmoid(zeta(0)), 0.0, 1.0);
  p.gamma_kbar = clamp_open(sigmoid(zeta(1)), 0.0, 1.0);
  p.b = 1.0 + std::max(std::exp(zeta(2)), 1e-9);
  return p;
}

FIMleResult fi_mle(const Eigen::VectorXd& returns, const FIParams& tmpl,
                   const FIMleOptions& opts) {
  if (returns.size() < 2) throw InvalidArgument("fi_mle: too few observations");
  if (opts.starts < 1) throw InvalidArgument("fi_mle: need at least one start");
  if (!tmpl.has_alpha())
    throw InvalidArgument("fi_mle: template must carry a calibrated alpha");

  auto negloglik = [&](const Eigen::VectorXd& z) {
    try {
      const FIParams cand =
          from_unconstrained(Eigen::Vector3d(z(0), z(1), z(2)), tmpl);
      return -fi_filter(returns, cand).loglik;
    } catch (const NumericError&) {
      return std::numeric_limits<double>::max();
    }
  };

  const Eigen::Vector3d base = to_unconstrained(tmpl);
  NelderMeadOptions nm;
  nm.max_evals = opts.max_evals;
  nm.ftol = opts.ftol;
  nm.xtol = opts.xtol;

  FIMleResult out;
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.starts; ++s) {
    Eigen::Vector3d z0 = base;
    if (s > 0) {
      RandomStream rs(derive_seed(opts.seed, "fi-mle-start"),
                      static_cast<std::uint32_t>(s), 0);
      for (int k = 0; k < 3; ++k) z0(k) += 0.5 * rs.normal();
    }
    const NelderMeadResult r =
        nelder_mead(negloglik, z0, Eigen::Vector3d::Constant(0.25), nm);
    FIStartReport rep;
    rep.start = z0;
    rep.loglik = -r.f;
    rep.evaluations = r.evaluations;
    rep.converged = r.converged;
    out.starts.push_back(rep);
    if (r.f < best) {
      best = r.f;
      out.best_start = s;
      out.params =
          from_unconstrained(Eigen::Vector3d(r.x(0), r.x(1), r.x(2)), tmpl);
      out.loglik = -r.f;
    }
  }
  return out;
}

Eigen::MatrixXd fi_score(const Eigen::VectorXd& returns, const FIParams& at,
                         double step) {
  if (!(step > 0.0)) throw InvalidArgument("fi_score: step must be positive");
  if (!(at.m0 > 1.0) || !(at.m0 < 2.0) || !(at.gamma_kbar > 0.0) ||
      !(at.gamma_kbar < 1.0) || !(at.b > 1.0))
    throw InvalidArgument("fi_score: parameter point must be interior");
  const Eigen::Vector3d z = to_unconstrained(at);
  Eigen::MatrixXd score(returns.size(), 3);
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d zp = z, zm = z;
    zp(k) += step;
    zm(k) -= step;
    const Eigen::VectorXd up =
        fi_filter(returns, from_unconstrained(zp, at)).increments;
    const Eigen::VectorXd dn =
        fi_filter(returns, from_unconstrained(zm, at)).increments;
    score.col(k) =
        (up.array().log() - dn.array().log()) / (2.0 * step);
  }
  return score;
}

Eigen::VectorXd simulate_returns(const FIParams& p, long t_max,
                                 std::uint64_t seed) {
  if (t_max < 1)
    throw InvalidArgument("simulate_returns: t_max must be >= 1");
  const FIModel model(p);
  const int d = p.n_states();
  RandomStream rng(seed, 0, 0);
  int state = static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(d)));
  Eigen::VectorXd ret(t_max);
  for (long t = 0; t < t_max; ++t) {
    const double u = rng.uniform();
    double cum = 0.0;
    int next = d - 1;
    for (int j = 0; j < d; ++j) {
      cum += model.transition()(state, j);
      if (u <= cum) {
        next = j;
        break;
      }
    }
    const double sd = model.volatilities()(next);
    ret(t) = model.mean(state, next) + sd * rng.normal();
    state = next;
  }
  return ret;
}

namespace {

class FIStateModel final : public StateModel<int> {
 public:
  explicit FIStateModel(const FIParams& p) : model_(p) {}

  int obs_dim() const override { return 1; }

  int sample_prior(RandomStream& rng) const override {
    return static_cast<int>(rng.uniform_below(
        static_cast<std::uint32_t>(model_.params().n_states())));
  }

  int sample_pair(const int& prev, const ObservationHistory&,
                  RandomStream& rng,
                  Eigen::Ref<Eigen::VectorXd> obs_out) const override {
    const int d = model_.params().n_states();
    const double u = rng.uniform();
    double cum = 0.0;
    int next = d - 1;
    for (int j = 0; j < d; ++j) {
      cum += model_.transition()(prev, j);
      if (u <= cum) {
        next = j;
        break;
      }
    }
    obs_out(0) =
        model_.mean(prev, next) + model_.volatilities()(next) * rng.normal();
    return next;
  }

 private:
  FIModel model_;
};

}  // namespace

std::unique_ptr<StateModel<int>> as_state_model(const FIParams& p) {
  return std::make_unique<FIStateModel>(p);
}

}  // namespace sos::fi
