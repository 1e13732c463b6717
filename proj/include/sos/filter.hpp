#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sos/errors.hpp"
#include "sos/kernels.hpp"
#include "sos/log.hpp"
#include "sos/parallel.hpp"
#include "sos/random.hpp"

namespace sos {

// Read-only view of the observations processed so far; row i is the i-th
// observation (0-based), so at step t the history holds rows [0, t-1).
class ObservationHistory {
 public:
  ObservationHistory() = default;
  ObservationHistory(const Eigen::MatrixXd& all, Eigen::Index count)
      : all_(&all), count_(count) {}
  Eigen::Index size() const noexcept { return count_; }
  int obs_dim() const noexcept {
    return all_ ? static_cast<int>(all_->cols()) : 0;
  }
  auto row(Eigen::Index i) const { return all_->row(i); }

 private:
  const Eigen::MatrixXd* all_ = nullptr;
  Eigen::Index count_ = 0;
};

// A dynamic model that can jointly propose the next state together with a
// pseudo-observation drawn from the same transition. This is the only
// capability the filter requires: no transition or measurement density is
// ever evaluated.
template <class State>
class StateModel {
 public:
  virtual ~StateModel() = default;
  virtual int obs_dim() const = 0;
  virtual State sample_prior(RandomStream& rng) const = 0;
  // Draws (s_t, r_t~) given s_{t-1} and past observations, writing the
  // pseudo-observation into obs_out (size obs_dim()).
  virtual State sample_pair(const State& prev, const ObservationHistory& history,
                            RandomStream& rng,
                            Eigen::Ref<Eigen::VectorXd> obs_out) const = 0;
};

template <class State>
struct ParticleCloud {
  std::vector<State> states;
  // n x obs_dim when present (0 x 0 before the first propagation). Row n is
  // the pseudo-observation drawn jointly with states[n].
  Eigen::MatrixXd pseudo_obs;
  // Normalized importance weights when present (empty right after resampling
  // reset them to uniform, they are stored explicitly anyway).
  Eigen::VectorXd weights;

  Eigen::Index size() const noexcept {
    return static_cast<Eigen::Index>(states.size());
  }
  bool has_pseudo_obs() const noexcept { return pseudo_obs.rows() > 0; }
  bool has_weights() const noexcept { return weights.size() > 0; }
};

enum class ResamplingScheme { multinomial, stratified, residual, residual_stratified };

ResamplingScheme resampling_from_name(std::string_view name);
std::string_view resampling_name(ResamplingScheme s);

struct FilterStep {
  long t = 0;                // 1-based observation index
  double increment = 0.0;    // kernel estimate of f(r_t | r_1..r_{t-1})
  double ess = 0.0;          // effective sample size 1/sum(w^2)
  double bandwidth = 0.0;    // realized bandwidth after any escalation
  int escalations = 0;
  Eigen::VectorXd moments;   // weighted particle means of the moment functions
};

struct FilterOutput {
  double loglik = 0.0;
  std::vector<FilterStep> steps;
};

// Raised when a step fails mid-run; carries the trace accumulated so far.
class FilterRunError : public NumericError {
 public:
  FilterRunError(const std::string& msg, long step, FilterOutput partial)
      : NumericError(msg), step_(step), partial_(std::move(partial)) {}
  long step() const noexcept { return step_; }
  const FilterOutput& partial() const noexcept { return partial_; }

 private:
  long step_;
  FilterOutput partial_;
};

struct FilterConfig {
  Eigen::Index n_particles = 0;
  Kernel kernel = Kernel::gaussian(1);
  BandwidthPolicy bandwidth{};
  ResamplingScheme resampling = ResamplingScheme::residual_stratified;
  std::uint64_t seed = 0;
  int workers = 1;
  int max_bandwidth_escalations = 10;
};

template <class State>
using MomentFn = std::function<double(const State&)>;

template <class State>
using StepCallback = std::function<void(long, const ParticleCloud<State>&)>;

namespace detail {

struct WeightsAndDensity {
  Eigen::VectorXd weights;
  double density = 0.0;  // mean of the unnormalized kernel values
  double bandwidth = 0.0;
  int escalations = 0;
};

// Kernel weights with bandwidth escalation: if every weight underflows to
// zero the bandwidth is doubled (with a warning) up to max_escalations times.
WeightsAndDensity weights_with_escalation(const Eigen::MatrixXd& pseudo_obs,
                                          const Eigen::VectorXd& observation,
                                          const Kernel& kernel, double h0,
                                          int max_escalations, long step);

// Robust spread of the pseudo-observations used by the adaptive bandwidth:
// geometric mean over coordinates of 1.4826 * MAD, falling back to the
// standard deviation for coordinates whose MAD vanishes. Returns 0 when the
// cloud is fully degenerate.
double adaptive_scale(const Eigen::MatrixXd& pseudo_obs);

std::vector<Eigen::Index> resample_indices(const Eigen::VectorXd& weights,
                                           ResamplingScheme scheme,
                                           RandomStream& rng);

}  // namespace detail

// Normalized kernel importance weights for one observation. Throws
// DegenerateWeightsError when all weights vanish at the given bandwidth.
Eigen::VectorXd compute_weights(const Eigen::MatrixXd& pseudo_obs,
                                const Eigen::VectorXd& observation,
                                const Kernel& kernel, double h, long step = -1);

// Propagates every particle one step, drawing state/pseudo-observation pairs
// with per-particle streams keyed by (seed, step, particle index), so results
// do not depend on the worker count.
template <class State>
void sample_pairs(const StateModel<State>& model, ParticleCloud<State>& cloud,
                  const ObservationHistory& history, std::uint64_t seed,
                  long step, int workers) {
  const Eigen::Index n = cloud.size();
  const int d = model.obs_dim();
  if (n == 0) throw InvalidArgument("sample_pairs: empty cloud");
  if (d < 1 || d > 8)
    throw InvalidArgument("sample_pairs: obs_dim must lie in [1,8]");
  if (cloud.pseudo_obs.rows() != n || cloud.pseudo_obs.cols() != d)
    cloud.pseudo_obs.resize(n, d);
  std::vector<State> next(static_cast<std::size_t>(n));
  parallel_for_blocks(
      static_cast<std::size_t>(n), workers,
      [&](std::size_t lo, std::size_t hi) {
        Eigen::Matrix<double, 8, 1> buf;
        for (std::size_t i = lo; i < hi; ++i) {
          RandomStream rs(seed, stream_ctx::step(step),
                          static_cast<std::uint32_t>(i));
          next[i] = model.sample_pair(cloud.states[i], history, rs,
                                      buf.head(d));
          if (!buf.head(d).allFinite())
            throw ModelEvalError(
                "sample_pairs: non-finite pseudo-observation at step " +
                    std::to_string(step) + ", particle " + std::to_string(i),
                static_cast<long>(i));
          cloud.pseudo_obs.row(static_cast<Eigen::Index>(i)) =
              buf.head(d).transpose();
        }
      });
  cloud.states = std::move(next);
  cloud.weights.resize(0);
}

// Resamples states and pseudo-observations jointly; weights become uniform.
template <class State>
void resample(ParticleCloud<State>& cloud, ResamplingScheme scheme,
              RandomStream& rng) {
  if (!cloud.has_weights())
    throw InvalidArgument("resample: cloud carries no weights");
  const auto idx = detail::resample_indices(cloud.weights, scheme, rng);
  std::vector<State> states;
  states.reserve(idx.size());
  for (Eigen::Index j : idx) states.push_back(cloud.states[j]);
  cloud.states = std::move(states);
  if (cloud.has_pseudo_obs()) {
    Eigen::MatrixXd po(cloud.pseudo_obs.rows(), cloud.pseudo_obs.cols());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(idx.size()); ++i)
      po.row(i) = cloud.pseudo_obs.row(idx[static_cast<std::size_t>(i)]);
    cloud.pseudo_obs = std::move(po);
  }
  cloud.weights.setConstant(cloud.size(), 1.0 / static_cast<double>(cloud.size()));
}

// One assimilation step: propagate, weight, record, resample.
template <class State>
FilterStep filter_step(const StateModel<State>& model,
                       ParticleCloud<State>& cloud,
                       const Eigen::VectorXd& observation,
                       const ObservationHistory& history, long t,
                       const FilterConfig& cfg,
                       std::span<const MomentFn<State>> moment_fns = {}) {
  sample_pairs(model, cloud, history, cfg.seed, t, cfg.workers);

  const int d = model.obs_dim();
  double h0;
  if (cfg.bandwidth.mode == BandwidthPolicy::Mode::adaptive_scale) {
    const double scale = detail::adaptive_scale(cloud.pseudo_obs);
    if (scale > 0.0) {
      h0 = bandwidth_value(cfg.bandwidth, d,
                           static_cast<double>(cloud.size()), scale);
    } else {
      log::warn("filter_step: degenerate pseudo-observation spread at step " +
                std::to_string(t) + "; falling back to power-law bandwidth");
      h0 = bandwidth_value(BandwidthPolicy::power_law(cfg.bandwidth.h1), d,
                           static_cast<double>(cloud.size()));
    }
  } else {
    h0 = bandwidth_value(cfg.bandwidth, d, static_cast<double>(cloud.size()));
  }

  auto wd = detail::weights_with_escalation(cloud.pseudo_obs, observation,
                                            cfg.kernel, h0,
                                            cfg.max_bandwidth_escalations, t);
  cloud.weights = std::move(wd.weights);

  FilterStep rec;
  rec.t = t;
  rec.bandwidth = wd.bandwidth;
  rec.escalations = wd.escalations;
  rec.increment = wd.density;
  if (rec.increment < std::numeric_limits<double>::min()) {
    log::warn("filter_step: likelihood increment underflow at step " +
              std::to_string(t) + "; clipping");
    rec.increment = std::numeric_limits<double>::min();
  }
  rec.ess = 1.0 / cloud.weights.array().square().sum();
  rec.moments.resize(static_cast<Eigen::Index>(moment_fns.size()));
  for (std::size_t k = 0; k < moment_fns.size(); ++k) {
    double acc = 0.0, comp = 0.0;
    for (Eigen::Index n = 0; n < cloud.size(); ++n) {
      const double term =
          cloud.weights(n) * moment_fns[k](cloud.states[static_cast<std::size_t>(n)]);
      const double y = term - comp;
      const double s = acc + y;
      comp = (s - acc) - y;
      acc = s;
    }
    rec.moments(static_cast<Eigen::Index>(k)) = acc;
  }

  RandomStream rs(cfg.seed, stream_ctx::step(t), stream_ctx::kResample);
  resample(cloud, cfg.resampling, rs);
  return rec;
}

// Full filtering pass. The prior cloud is drawn from the model's own prior
// sampler with streams (seed, step 0, particle). On a numerical failure the
// partial trace is attached to the thrown FilterRunError.
template <class State>
FilterOutput run_filter(const StateModel<State>& model,
                        const Eigen::MatrixXd& observations,
                        const FilterConfig& cfg,
                        std::span<const MomentFn<State>> moment_fns = {},
                        ParticleCloud<State>* final_cloud = nullptr,
                        const StepCallback<State>& per_step = {}) {
  const Eigen::Index t_max = observations.rows();
  if (t_max < 1) throw InvalidArgument("run_filter: empty observation set");
  if (observations.cols() != model.obs_dim())
    throw InvalidArgument("run_filter: observation dimension mismatch");
  if (cfg.n_particles < 2)
    throw InvalidArgument("run_filter: need at least two particles");
  if (cfg.workers < 1)
    throw InvalidArgument("run_filter: workers must be >= 1");

  ParticleCloud<State> cloud;
  cloud.states.resize(static_cast<std::size_t>(cfg.n_particles),
                      State{});
  parallel_for_blocks(static_cast<std::size_t>(cfg.n_particles), cfg.workers,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t i = lo; i < hi; ++i) {
                          RandomStream rs(cfg.seed, stream_ctx::kPriorStep,
                                          static_cast<std::uint32_t>(i));
                          cloud.states[i] = model.sample_prior(rs);
                        }
                      });

  FilterOutput out;
  out.steps.reserve(static_cast<std::size_t>(t_max));
  for (long t = 1; t <= t_max; ++t) {
    ObservationHistory history(observations, t - 1);
    const Eigen::VectorXd obs = observations.row(t - 1).transpose();
    try {
      out.steps.push_back(filter_step(model, cloud, obs, history, t, cfg,
                                      moment_fns));
    } catch (const FilterRunError&) {
      throw;
    } catch (const NumericError& e) {
      throw FilterRunError(e.what(), t, std::move(out));
    }
    out.loglik += std::log(out.steps.back().increment);
    if (per_step) per_step(t, cloud);
  }
  if (final_cloud) *final_cloud = std::move(cloud);
  return out;
}

// Recursive upper bound on the mean squared error of the likelihood
// increments. kappas[t] = (bound on the predictive density, bound on its
// curvature); f_lower[t] bounds the density from below at the realized
// observation; h_of(t, n) is the bandwidth schedule. Element 0 of the result
// is the initialization 1/N.
std::vector<double> mse_bound(
    std::span<const std::pair<double, double>> kappas,
    std::span<const double> f_lower, const Kernel& kernel,
    const std::function<double(long, double)>& h_of, double n_particles);

}  // namespace sos
