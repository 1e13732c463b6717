#include "sos/filter.hpp"

#include <algorithm>
#include <cmath>

#include "sos/stats.hpp"

namespace sos {

ResamplingScheme resampling_from_name(std::string_view name) {
  if (name == "multinomial") return ResamplingScheme::multinomial;
  if (name == "stratified") return ResamplingScheme::stratified;
  if (name == "residual") return ResamplingScheme::residual;
  if (name == "residual_stratified")
    return ResamplingScheme::residual_stratified;
  throw ConfigError("unknown resampling scheme '" + std::string(name) + "'");
}

std::string_view resampling_name(ResamplingScheme s) {
  switch (s) {
    case ResamplingScheme::multinomial: return "multinomial";
    case ResamplingScheme::stratified: return "stratified";
    case ResamplingScheme::residual: return "residual";
    case ResamplingScheme::residual_stratified: return "residual_stratified";
  }
  return "?";
}

namespace detail {
namespace {

// Walks the cumulative weights against a nondecreasing sequence of points.
// points(k) must be nondecreasing in k; one output index per point.
template <class PointFn>
void cumulative_walk(const Eigen::VectorXd& w, Eigen::Index n_points,
                     const PointFn& points, std::vector<Eigen::Index>* out) {
  const Eigen::Index n = w.size();
  Eigen::Index idx = 0;
  double cum = w(0), comp = 0.0;
  for (Eigen::Index k = 0; k < n_points; ++k) {
    const double u = points(k);
    while (cum < u && idx + 1 < n) {
      ++idx;
      const double y = w(idx) - comp;
      const double t = cum + y;
      comp = (t - cum) - y;
      cum = t;
    }
    out->push_back(idx);
  }
}

void multinomial_pick(const Eigen::VectorXd& w, Eigen::Index count,
                      RandomStream& rng, std::vector<Eigen::Index>* out) {
  // Independent uniforms are not sorted; a fresh walk per draw would be
  // quadratic, so use a binary search over the cumulative weights instead.
  const Eigen::Index n = w.size();
  Eigen::VectorXd cum(n);
  double acc = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = w(i) - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
    cum(i) = acc;
  }
  cum(n - 1) = std::max(cum(n - 1), 1.0);  // guard against rounding shortfall
  for (Eigen::Index k = 0; k < count; ++k) {
    const double u = rng.uniform();
    const double* beg = cum.data();
    const double* it = std::lower_bound(beg, beg + n, u);
    out->push_back(std::min<Eigen::Index>(it - beg, n - 1));
  }
}

void stratified_pick(const Eigen::VectorXd& w, Eigen::Index count,
                     RandomStream& rng, std::vector<Eigen::Index>* out) {
  // One uniform per stratum ((k-1)/count, k/count].
  Eigen::VectorXd u(count);
  for (Eigen::Index k = 0; k < count; ++k)
    u(k) = (static_cast<double>(k) + (1.0 - rng.uniform())) /
           static_cast<double>(count);
  cumulative_walk(w, count, [&](Eigen::Index k) { return u(k); }, out);
}

}  // namespace

std::vector<Eigen::Index> resample_indices(const Eigen::VectorXd& weights,
                                           ResamplingScheme scheme,
                                           RandomStream& rng) {
  const Eigen::Index n = weights.size();
  if (n < 1) throw InvalidArgument("resample: empty weight vector");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
      throw InvalidArgument("resample: weights must be finite and nonnegative");
  if (std::abs(kahan_sum(weights) - 1.0) > 1e-9)
    throw InvalidArgument("resample: weights must sum to one");

  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(n));

  switch (scheme) {
    case ResamplingScheme::multinomial:
      multinomial_pick(weights, n, rng, &out);
      return out;
    case ResamplingScheme::stratified:
      stratified_pick(weights, n, rng, &out);
      return out;
    case ResamplingScheme::residual:
    case ResamplingScheme::residual_stratified: {
      // Deterministic copies floor(n*w) first, in particle order; the
      // remainder is drawn from the residual distribution.
      Eigen::VectorXd residual(n);
      Eigen::Index n_rem = n;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double scaled = static_cast<double>(n) * weights(i);
        const auto copies = static_cast<Eigen::Index>(std::floor(scaled));
        residual(i) = scaled - static_cast<double>(copies);
        for (Eigen::Index c = 0; c < copies; ++c) out.push_back(i);
        n_rem -= copies;
      }
      if (n_rem == 0) return out;
      const double total = kahan_sum(residual);
      if (!(total > 0.0))
        throw InvalidArgument("resample: residual mass vanished");
      residual /= total;
      if (scheme == ResamplingScheme::residual)
        multinomial_pick(residual, n_rem, rng, &out);
      else
        stratified_pick(residual, n_rem, rng, &out);
      return out;
    }
  }
  throw InvalidArgument("resample: unknown scheme");
}

double adaptive_scale(const Eigen::MatrixXd& pseudo_obs) {
  const Eigen::Index n = pseudo_obs.rows();
  const Eigen::Index d = pseudo_obs.cols();
  double log_acc = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> col(pseudo_obs.col(j).data(),
                            pseudo_obs.col(j).data() + n);
    double s = 1.4826 * mad(col);
    if (!(s > 0.0)) {
      const double mu = pseudo_obs.col(j).mean();
      s = std::sqrt((pseudo_obs.col(j).array() - mu).square().sum() /
                    std::max<double>(1.0, static_cast<double>(n - 1)));
    }
    if (!(s > 0.0)) return 0.0;
    log_acc += std::log(s);
  }
  return std::exp(log_acc / static_cast<double>(d));
}

WeightsAndDensity weights_with_escalation(const Eigen::MatrixXd& pseudo_obs,
                                          const Eigen::VectorXd& observation,
                                          const Kernel& kernel, double h0,
                                          int max_escalations, long step) {
  if (observation.size() != pseudo_obs.cols())
    throw InvalidArgument("compute_weights: observation dimension mismatch");
  const Eigen::Index n = pseudo_obs.rows();
  Eigen::MatrixXd diffs =
      (-pseudo_obs).rowwise() + observation.transpose();
  WeightsAndDensity wd;
  double h = h0;
  for (int attempt = 0; attempt <= max_escalations; ++attempt) {
    Eigen::VectorXd k = kernel.scaled_batch(h, diffs);
    const double total = kahan_sum(k);
    if (std::isfinite(total) && total > 0.0) {
      wd.weights = k / total;
      wd.density = total / static_cast<double>(n);
      wd.bandwidth = h;
      wd.escalations = attempt;
      return wd;
    }
    log::warn("compute_weights: all kernel weights vanished at step " +
              std::to_string(step) + " with bandwidth " + std::to_string(h) +
              "; doubling");
    h *= 2.0;
  }
  throw DegenerateWeightsError(
      "compute_weights: weights degenerate after " +
          std::to_string(max_escalations) + " bandwidth escalations at step " +
          std::to_string(step),
      step);
}

}  // namespace detail

Eigen::VectorXd compute_weights(const Eigen::MatrixXd& pseudo_obs,
                                const Eigen::VectorXd& observation,
                                const Kernel& kernel, double h, long step) {
  auto wd = detail::weights_with_escalation(pseudo_obs, observation, kernel, h,
                                            /*max_escalations=*/0, step);
  return std::move(wd.weights);
}

std::vector<double> mse_bound(
    std::span<const std::pair<double, double>> kappas,
    std::span<const double> f_lower, const Kernel& kernel,
    const std::function<double(long, double)>& h_of, double n_particles) {
  if (kappas.size() != f_lower.size())
    throw InvalidArgument("mse_bound: kappa and density bound sizes differ");
  if (!(n_particles >= 1.0))
    throw InvalidArgument("mse_bound: need at least one particle");
  const double a = kernel.second_moment();
  const double b = kernel.squared_mass();
  const int d = kernel.dim();
  const double inv_n = 1.0 / n_particles;

  std::vector<double> u;
  u.reserve(kappas.size() + 1);
  u.push_back(inv_n);
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const auto [kap, kap_prime] = kappas[i];
    const double f = f_lower[i];
    if (!(kap > 0.0) || !(kap_prime > 0.0) || !(f > 0.0))
      throw InvalidArgument("mse_bound: bounds must be positive");
    const long t = static_cast<long>(i) + 1;
    const double h = h_of(t, n_particles);
    if (!(h > 0.0)) throw InvalidArgument("mse_bound: bandwidth must be positive");
    const double bias = 2.0 * kap_prime * kap_prime * a * a * std::pow(h, 4);
    const double var = b * kap / (n_particles * std::pow(h, d));
    const double carry = 2.0 * u.back() * kap * kap;
    u.push_back(4.0 / (f * f) * (bias + var + carry) + inv_n);
  }
  return u;
}

}  // namespace sos
