#include "sos/indirect_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "sos/errors.hpp"
#include "sos/log.hpp"
#include "sos/random.hpp"
#include "sos/stats.hpp"

namespace sos::ii {

namespace {

double logit(double u) { return std::log(u / (1.0 - u)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_open(double u, double lo, double hi) {
  const double eps = 1e-9 * (hi - lo);
  return std::min(hi - eps, std::max(lo + eps, u));
}

void check_weight(const Eigen::Matrix4d& w) {
  const double scale = 1.0 + w.cwiseAbs().maxCoeff();
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("weighting matrix must be symmetric");
  Eigen::LLT<Eigen::Matrix4d> llt(w);
  if (llt.info() != Eigen::Success)
    throw InvalidArgument("weighting matrix must be positive definite");
}

// Gaussian kernel density estimate with the usual rule-of-thumb bandwidth
// 0.9 * min(sd, iqr/1.349) * n^(-1/5).
double kde_density(const Eigen::VectorXd& xs, double at) {
  const long n = xs.size();
  if (n < 2) throw InvalidArgument("density estimate needs at least 2 points");
  std::vector<double> v(xs.data(), xs.data() + n);
  const double sd = std::sqrt(variance(v));
  const double iqr =
      quantile_interpolated(v, 0.75) - quantile_interpolated(v, 0.25);
  double scale = sd;
  if (iqr > 0.0) scale = std::min(scale, iqr / 1.349);
  if (!(scale > 0.0))
    throw InvalidArgument("density estimate needs a sample with spread");
  const double bw = 0.9 * scale * std::pow(static_cast<double>(n), -0.2);
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    terms[static_cast<std::size_t>(i)] = normal_pdf((at - xs(i)) / bw);
  return kahan_sum(terms) / (static_cast<double>(n) * bw);
}

// d(natural)/d(unconstrained), diagonal by construction of the transforms.
Eigen::Vector4d natural_scale_diag(const econ::StructuralParams& p) {
  Eigen::Vector4d d;
  d(0) = (p.m0 - 1.0) * (2.0 - p.m0);
  d(1) = p.gamma_kbar * (1.0 - p.gamma_kbar);
  d(2) = p.b - 1.0;
  d(3) = p.sigma_delta;
  return d;
}

// Likelihood-block scores rescaled from unconstrained to natural units.
Eigen::MatrixXd natural_fi_scores(const Eigen::VectorXd& returns,
                                  const fi::FIParams& at) {
  Eigen::MatrixXd s = fi::fi_score(returns, at);
  s.col(0) /= (at.m0 - 1.0) * (2.0 - at.m0);
  s.col(1) /= at.gamma_kbar * (1.0 - at.gamma_kbar);
  s.col(2) /= at.b - 1.0;
  return s;
}

// Negative Hessian of the average log-likelihood in natural units, central
// finite differences with boundary-aware steps.
Eigen::Matrix3d fi_criterion_hessian(const Eigen::VectorXd& returns,
                                     const fi::FIParams& at) {
  const double t = static_cast<double>(returns.size());
  auto value = [&](const Eigen::Vector3d& x) {
    fi::FIParams q = at;
    q.m0 = x(0);
    q.gamma_kbar = x(1);
    q.b = x(2);
    return fi::fi_filter(returns, q).loglik / t;
  };
  const Eigen::Vector3d x(at.m0, at.gamma_kbar, at.b);
  Eigen::Vector3d step;
  step(0) = std::min(1e-4 * std::max(1.0, std::abs(x(0))),
                     0.25 * std::min(x(0) - 1.0, 2.0 - x(0)));
  step(1) = std::min(1e-4, 0.25 * std::min(x(1), 1.0 - x(1)));
  step(2) = std::min(1e-4 * std::max(1.0, std::abs(x(2))),
                     0.25 * (x(2) - 1.0));
  for (int k = 0; k < 3; ++k)
    if (!(step(k) > 0.0))
      throw InvalidArgument("hessian point must be interior");

  const double f0 = value(x);
  auto shifted = [&](int i, double di, int j, double dj) {
    Eigen::Vector3d y = x;
    y(i) += di;
    if (j >= 0) y(j) += dj;
    return value(y);
  };
  Eigen::Matrix3d h;
  for (int i = 0; i < 3; ++i) {
    h(i, i) = (shifted(i, step(i), -1, 0.0) - 2.0 * f0 +
               shifted(i, -step(i), -1, 0.0)) /
              (step(i) * step(i));
    for (int j = i + 1; j < 3; ++j) {
      const double mixed =
          (shifted(i, step(i), j, step(j)) - shifted(i, step(i), j, -step(j)) -
           shifted(i, -step(i), j, step(j)) +
           shifted(i, -step(i), j, -step(j))) /
          (4.0 * step(i) * step(j));
      h(i, j) = mixed;
      h(j, i) = mixed;
    }
  }
  return -h;
}

// Hessian of the full auxiliary criterion. The likelihood block and the eta
// block share no parameters, so the matrix is block diagonal exactly.
Eigen::Matrix4d aux_criterion_hessian(const Eigen::VectorXd& returns,
                                      const AuxiliaryEstimate& aux) {
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j.topLeftCorner<3, 3>() = fi_criterion_hessian(returns, aux.fi.params);
  j(3, 3) = aux.kind == EtaKind::median ? 2.0 * kde_density(returns, aux.eta)
                                        : 1.0;
  return j;
}

}  // namespace

EtaKind eta_from_name(std::string_view name) {
  if (name == "median") return EtaKind::median;
  if (name == "third-moment" || name == "third_moment")
    return EtaKind::third_moment;
  throw ConfigError("unknown auxiliary statistic '" + std::string(name) +
                    "' (expected median or third-moment)");
}

std::string_view eta_name(EtaKind kind) {
  return kind == EtaKind::median ? "median" : "third-moment";
}

double eta_statistic(const Eigen::VectorXd& returns, EtaKind kind) {
  if (returns.size() < 1)
    throw InvalidArgument("eta statistic needs a nonempty sample");
  if (kind == EtaKind::median) {
    std::vector<double> v(returns.data(), returns.data() + returns.size());
    return median_lower(std::move(v));
  }
  return returns.array().cube().mean();
}

Eigen::Vector4d AuxiliaryEstimate::as_vector() const {
  return Eigen::Vector4d(fi.params.m0, fi.params.gamma_kbar, fi.params.b, eta);
}

AuxiliaryEstimate auxiliary_estimator(const Eigen::VectorXd& returns,
                                      EtaKind kind, const fi::FIParams& tmpl,
                                      const AuxOptions& opts) {
  if (returns.size() < 100)
    throw InsufficientSampleError(
        "auxiliary estimation needs at least 100 observations");
  fi::FIMleOptions mle = opts.mle;
  fi::FIParams base = tmpl;
  if (opts.warm_start) {
    base = fi::from_unconstrained(*opts.warm_start, tmpl);
    mle.starts = 1;
  }
  AuxiliaryEstimate out;
  out.fi = fi::fi_mle(returns, base, mle);
  out.kind = kind;
  out.eta = eta_statistic(returns, kind);
  return out;
}

AuxiliaryEstimate binding_function(const econ::StructuralParams& theta, long s,
                                   long t, std::uint64_t seed, EtaKind kind,
                                   const AuxOptions& opts) {
  if (s < 1) throw InvalidArgument("binding function needs s >= 1");
  if (t < 1) throw InvalidArgument("binding function needs t >= 1");
  if (!theta.has_alpha())
    throw InvalidArgument(
        "binding function needs a calibrated theta (risk aversion unset)");
  const Eigen::VectorXd path = econ::simulate_returns(theta, s * t, seed);
  return auxiliary_estimator(path, kind, fi::FIParams::from_structural(theta),
                             opts);
}

double ii_objective(const econ::StructuralParams& theta,
                    const Eigen::Vector4d& mu_data, long s, long t,
                    const Eigen::Matrix4d& weight, std::uint64_t seed,
                    EtaKind kind, const AuxOptions& opts) {
  check_weight(weight);
  const Eigen::Vector4d d =
      binding_function(theta, s, t, seed, kind, opts).as_vector() - mu_data;
  return d.dot(weight * d);
}

Eigen::MatrixXd newey_west(const Eigen::MatrixXd& psi, int lags) {
  const long t = psi.rows();
  if (lags < 0) throw InvalidArgument("lag count must be nonnegative");
  if (t <= lags)
    throw InvalidArgument("lag count must be below the sample length");
  const double tn = static_cast<double>(t);
  Eigen::MatrixXd out = psi.transpose() * psi / tn;
  for (int v = 1; v <= lags; ++v) {
    const Eigen::MatrixXd g =
        psi.middleRows(v, t - v).transpose() * psi.topRows(t - v) / tn;
    out += (1.0 - v / (lags + 1.0)) * (g + g.transpose());
  }
  return out;
}

Eigen::MatrixXd auxiliary_scores(const Eigen::VectorXd& returns,
                                 const AuxiliaryEstimate& aux) {
  Eigen::MatrixXd s(returns.size(), 4);
  s.leftCols<3>() = natural_fi_scores(returns, aux.fi.params);
  if (aux.kind == EtaKind::median) {
    s.col(3) = (returns.array() > aux.eta).cast<double>() -
               (returns.array() < aux.eta).cast<double>();
  } else {
    s.col(3) = returns.array().cube() - aux.eta;
  }
  return s;
}

Eigen::Matrix4d auxiliary_sandwich(const Eigen::VectorXd& returns,
                                   const AuxiliaryEstimate& aux, int nw_lags) {
  const Eigen::Matrix4d i0 = newey_west(auxiliary_scores(returns, aux), nw_lags);
  const Eigen::Matrix4d j0 = aux_criterion_hessian(returns, aux);
  const Eigen::Matrix4d ji = j0.inverse();
  const Eigen::Matrix4d w = ji * i0 * ji.transpose();
  return 0.5 * (w + w.transpose());
}

Eigen::Matrix4d binding_jacobian(const econ::StructuralParams& theta, long s,
                                 long t, std::uint64_t seed, EtaKind kind,
                                 const AuxOptions& opts, double rel_step) {
  if (!(rel_step > 0.0))
    throw InvalidArgument("jacobian step must be positive");
  const Eigen::Vector4d z = theta_to_unconstrained(theta);
  Eigen::Matrix4d j;
  for (int k = 0; k < 4; ++k) {
    const double dz = rel_step * std::max(1.0, std::abs(z(k)));
    Eigen::Vector4d zp = z, zm = z;
    zp(k) += dz;
    zm(k) -= dz;
    const Eigen::Vector4d up =
        binding_function(theta_from_unconstrained(zp, theta), s, t, seed, kind,
                         opts)
            .as_vector();
    const Eigen::Vector4d dn =
        binding_function(theta_from_unconstrained(zm, theta), s, t, seed, kind,
                         opts)
            .as_vector();
    j.col(k) = (up - dn) / (2.0 * dz);
  }
  return j;
}

Eigen::Matrix4d ii_covariance(const Eigen::Matrix4d& binding_jac,
                              const Eigen::Matrix4d& wstar,
                              const Eigen::Vector4d& natural_scale, long s,
                              long t) {
  if (s < 1) throw InvalidArgument("covariance needs s >= 1");
  if (t < 1) throw InvalidArgument("covariance needs t >= 1");
  const Eigen::Matrix4d ji = binding_jac.inverse();
  Eigen::Matrix4d c = ji * wstar * ji.transpose();
  c = natural_scale.asDiagonal() * c * natural_scale.asDiagonal();
  c *= (1.0 + 1.0 / static_cast<double>(s)) / static_cast<double>(t);
  return 0.5 * (c + c.transpose());
}

IIResult estimate_ii(const Eigen::VectorXd& returns, const IIOptions& opts) {
  if (opts.s < 1) throw InvalidArgument("estimate_ii: s must be >= 1");
  if (opts.max_evals < 1)
    throw InvalidArgument("estimate_ii: search budget must be >= 1");
  check_weight(opts.weight);
  const econ::StructuralParams tmpl =
      opts.tmpl.has_alpha() ? opts.tmpl : econ::calibrate(opts.tmpl);
  const long t_sim = opts.t > 0 ? opts.t : returns.size();

  IIResult out;
  out.data_aux = auxiliary_estimator(
      returns, opts.kind, fi::FIParams::from_structural(tmpl), opts.aux);
  out.mu_data = out.data_aux.as_vector();

  AuxOptions sim_opts = opts.aux_sim;
  if (!sim_opts.warm_start)
    sim_opts.warm_start = fi::to_unconstrained(out.data_aux.fi.params);

  // Start the structural search from the data's likelihood-block fit with
  // the template's signal noise level.
  econ::StructuralParams start = tmpl;
  start.m0 = out.data_aux.fi.params.m0;
  start.gamma_kbar = out.data_aux.fi.params.gamma_kbar;
  start.b = out.data_aux.fi.params.b;
  const Eigen::Vector4d z0 = theta_to_unconstrained(start);

  const std::uint64_t crn_seed = derive_seed(opts.seed, "binding");
  auto objective = [&](const Eigen::VectorXd& z) {
    try {
      const econ::StructuralParams cand =
          theta_from_unconstrained(Eigen::Vector4d(z), tmpl);
      return ii_objective(cand, out.mu_data, opts.s, t_sim, opts.weight,
                          crn_seed, opts.kind, sim_opts);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::max();
    }
  };

  NelderMeadOptions nm;
  nm.max_evals = opts.max_evals;
  nm.ftol = 1e-14;
  nm.xtol = 1e-8;
  nm.target_f = opts.objective_floor;
  Eigen::Vector4d steps;
  steps << 0.2, 0.2, 0.2, 0.3;
  out.search = nelder_mead(objective, z0, steps, nm);
  if (!(out.search.f <= opts.objective_floor))
    log::warn("indirect inference search stopped at objective " +
              std::to_string(out.search.f) + " above the floor " +
              std::to_string(opts.objective_floor));
  out.theta = theta_from_unconstrained(Eigen::Vector4d(out.search.x), tmpl);
  out.objective = out.search.f;

  const Eigen::Matrix4d wstar =
      auxiliary_sandwich(returns, out.data_aux, opts.nw_lags);
  const Eigen::Matrix4d jz =
      binding_jacobian(out.theta, opts.s, t_sim, crn_seed, opts.kind, sim_opts,
                       opts.jacobian_rel_step);
  out.covariance = ii_covariance(jz, wstar, natural_scale_diag(out.theta),
                                 opts.s, returns.size());
  out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

double emm_objective(const econ::StructuralParams& theta,
                     const AuxiliaryEstimate& data_aux, long s, long t,
                     const Eigen::Matrix4d& weight, std::uint64_t seed) {
  check_weight(weight);
  if (s < 1) throw InvalidArgument("emm objective needs s >= 1");
  if (t < 1) throw InvalidArgument("emm objective needs t >= 1");
  if (!theta.has_alpha())
    throw InvalidArgument(
        "emm objective needs a calibrated theta (risk aversion unset)");
  const Eigen::VectorXd path = econ::simulate_returns(theta, s * t, seed);
  const Eigen::Vector4d g =
      auxiliary_scores(path, data_aux).colwise().mean().transpose();
  return g.dot(weight * g);
}

Eigen::Vector4d smm_moments(const Eigen::VectorXd& returns) {
  const long t = returns.size();
  if (t < 2)
    throw InvalidArgument("moment vector needs at least 2 observations");
  Eigen::Vector4d m;
  m(0) = returns.array().square().mean();
  m(1) = returns.array().cube().mean();
  m(2) = returns.array().square().square().mean();
  m(3) = (returns.head(t - 1).array() * returns.tail(t - 1).array().square())
             .mean();
  return m;
}

IIResult estimate_smm(const Eigen::VectorXd& returns, const IIOptions& opts) {
  if (opts.s < 1) throw InvalidArgument("estimate_smm: s must be >= 1");
  if (opts.max_evals < 1)
    throw InvalidArgument("estimate_smm: search budget must be >= 1");
  check_weight(opts.weight);
  const econ::StructuralParams tmpl =
      opts.tmpl.has_alpha() ? opts.tmpl : econ::calibrate(opts.tmpl);
  const long t_sim = opts.t > 0 ? opts.t : returns.size();
  const long t_data = returns.size();

  IIResult out;
  out.mu_data = smm_moments(returns);

  const std::uint64_t crn_seed = derive_seed(opts.seed, "binding");
  auto sim_moments = [&](const econ::StructuralParams& cand) {
    return smm_moments(econ::simulate_returns(cand, opts.s * t_sim, crn_seed));
  };
  auto objective = [&](const Eigen::VectorXd& z) {
    try {
      const Eigen::Vector4d g =
          sim_moments(theta_from_unconstrained(Eigen::Vector4d(z), tmpl)) -
          out.mu_data;
      return g.dot(opts.weight * g);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::max();
    }
  };

  // No early-stop floor here: the moment discrepancies live on the scale of
  // daily return powers, far below the likelihood-block floor.
  NelderMeadOptions nm;
  nm.max_evals = opts.max_evals;
  nm.ftol = 1e-30;
  nm.xtol = 1e-8;
  const Eigen::Vector4d z0 = theta_to_unconstrained(tmpl);
  Eigen::Vector4d steps;
  steps << 0.2, 0.2, 0.2, 0.3;
  out.search = nelder_mead(objective, z0, steps, nm);
  out.theta = theta_from_unconstrained(Eigen::Vector4d(out.search.x), tmpl);
  out.objective = out.search.f;

  // Sandwich pieces: the moment estimating equations have unit Hessian, so
  // the score long-run covariance is the full W*.
  const long n = t_data - 1;
  Eigen::MatrixXd psi(n, 4);
  psi.col(0) = returns.tail(n).array().square() - out.mu_data(0);
  psi.col(1) = returns.tail(n).array().cube() - out.mu_data(1);
  psi.col(2) = returns.tail(n).array().square().square() - out.mu_data(2);
  psi.col(3) = returns.head(n).array() * returns.tail(n).array().square() -
               out.mu_data(3);
  const Eigen::Matrix4d wstar = newey_west(psi, opts.nw_lags);

  const Eigen::Vector4d zh = theta_to_unconstrained(out.theta);
  Eigen::Matrix4d jz;
  for (int k = 0; k < 4; ++k) {
    const double dz = opts.jacobian_rel_step * std::max(1.0, std::abs(zh(k)));
    Eigen::Vector4d zp = zh, zm = zh;
    zp(k) += dz;
    zm(k) -= dz;
    jz.col(k) = (sim_moments(theta_from_unconstrained(zp, tmpl)) -
                 sim_moments(theta_from_unconstrained(zm, tmpl))) /
                (2.0 * dz);
  }
  out.covariance = ii_covariance(jz, wstar, natural_scale_diag(out.theta),
                                 opts.s, t_data);
  out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

Eigen::Vector3d fi_standard_errors(const Eigen::VectorXd& returns,
                                   const fi::FIParams& at, int nw_lags) {
  const Eigen::Matrix3d i0 =
      newey_west(natural_fi_scores(returns, at), nw_lags);
  const Eigen::Matrix3d j0 = fi_criterion_hessian(returns, at);
  const Eigen::Matrix3d ji = j0.inverse();
  const Eigen::Matrix3d avar = ji * i0 * ji.transpose();
  return (avar.diagonal() / static_cast<double>(returns.size()))
      .cwiseMax(0.0)
      .cwiseSqrt();
}

Eigen::Vector4d theta_to_unconstrained(const econ::StructuralParams& p) {
  if (!(p.sigma_delta > 0.0))
    throw InvalidArgument("sigma_delta must be positive");
  Eigen::Vector4d z;
  z(0) = logit(clamp_open(p.m0 - 1.0, 0.0, 1.0));
  z(1) = logit(clamp_open(p.gamma_kbar, 0.0, 1.0));
  z(2) = std::log(std::max(p.b - 1.0, 1e-12));
  z(3) = std::log(p.sigma_delta);
  return z;
}

econ::StructuralParams theta_from_unconstrained(
    const Eigen::Vector4d& z, const econ::StructuralParams& tmpl) {
  econ::StructuralParams p = tmpl;
  // The logistic saturates to 0/1 in double precision for |z| beyond ~37;
  // clamp back into the open interval so every finite coordinate vector maps
  // to a valid interior parameter point (the optimizer may roam that far).
  p.m0 = 1.0 + clamp_open(sigmoid(z(0)), 0.0, 1.0);
  p.gamma_kbar = clamp_open(sigmoid(z(1)), 0.0, 1.0);
  p.b = 1.0 + std::max(std::exp(z(2)), 1e-12);
  p.sigma_delta = std::max(std::exp(z(3)),
                           std::numeric_limits<double>::min());
  return p;
}

}  // namespace sos::ii
