#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "sos/errors.hpp"
#include "sos/filter.hpp"
#include "sos/random.hpp"
#include "sos/stats.hpp"

namespace sos::risk {

// A loss threshold for the cumulative return over the next `horizon` days:
// the return falls below -value with model probability `level`.
struct VaRForecast {
  long t = 0;          // day index the forecast is issued on
  int horizon = 1;     // days ahead covered
  double level = 0.05; // tail probability
  double value = 0.0;  // positive = loss threshold
};

struct BacktestReport {
  double level = 0.0;
  int horizon = 1;
  long n = 0;
  double failure_rate = 0.0;
  double std_error = 0.0;
  bool reject_at_1pct = false;
};

// Forward-simulates horizon-day cumulative returns from every particle of a
// post-resampling cloud, paths_per_particle paths each, returning the pooled
// draws. Streams are keyed by a seed derived from `seed` plus
// (particle, path), so the result is independent of the worker count and
// never collides with the filter's own streams.
template <class State>
std::vector<double> predictive_draws(const ParticleCloud<State>& cloud,
                                     const StateModel<State>& model,
                                     int horizon, int paths_per_particle,
                                     std::uint64_t seed, int workers = 1) {
  if (horizon < 1)
    throw InvalidArgument("predictive_draws: horizon must be >= 1");
  if (paths_per_particle < 1)
    throw InvalidArgument(
        "predictive_draws: need at least one path per particle");
  if (model.obs_dim() != 1)
    throw InvalidArgument("predictive_draws: needs a scalar observation model");
  const Eigen::Index n = cloud.size();
  if (n == 0) throw InvalidArgument("predictive_draws: empty cloud");

  const std::uint64_t fwd_seed = derive_seed(seed, "var-forward");
  std::vector<double> draws(static_cast<std::size_t>(n) *
                            static_cast<std::size_t>(paths_per_particle));
  const ObservationHistory empty;
  parallel_for_blocks(
      static_cast<std::size_t>(n), workers,
      [&](std::size_t lo, std::size_t hi) {
        Eigen::Matrix<double, 8, 1> buf;
        for (std::size_t i = lo; i < hi; ++i) {
          for (int j = 0; j < paths_per_particle; ++j) {
            RandomStream rs(fwd_seed, static_cast<std::uint32_t>(i),
                            static_cast<std::uint32_t>(j));
            State s = cloud.states[i];
            double acc = 0.0;
            for (int step = 0; step < horizon; ++step) {
              s = model.sample_pair(s, empty, rs, buf.head(1));
              acc += buf(0);
            }
            draws[i * static_cast<std::size_t>(paths_per_particle) +
                  static_cast<std::size_t>(j)] = acc;
          }
        }
      });
  return draws;
}

// Loss threshold from an already pooled predictive sample.
VaRForecast var_from_draws(std::vector<double> draws, int horizon, double p,
                           long t_index);

// One-call convenience combining the two stages above.
template <class State>
VaRForecast model_var(const ParticleCloud<State>& cloud,
                      const StateModel<State>& model, int horizon, double p,
                      int paths_per_particle, std::uint64_t seed,
                      int workers = 1, long t_index = 0) {
  return var_from_draws(
      predictive_draws(cloud, model, horizon, paths_per_particle, seed,
                       workers),
      horizon, p, t_index);
}

// Rolling-window benchmark: negative p-quantile (linear interpolation) of
// the `window` returns strictly before day t.
VaRForecast historical_var(const Eigen::VectorXd& returns, long t,
                           int window, double p);

// Unconditional coverage backtest. realized(i) is the cumulative return over
// the window covered by forecasts[i]; all forecasts must share one level and
// horizon. hac_lags = 0 uses the binomial standard error; a positive value
// applies a lag-window correction for overlapping windows. The rejection
// flag tests |rate - level| at the two-sided 1% significance level.
BacktestReport failure_rate(const Eigen::VectorXd& realized,
                            const std::vector<VaRForecast>& forecasts,
                            int hac_lags = 0);

// HAC-adjusted likelihood-ratio comparison of two models from their
// per-observation log-likelihood increments: sqrt(T) * mean(d) / lrv(d)^0.5
// with d = increments_a - increments_b. Positive favours the first model.
double vuong_test(const Eigen::VectorXd& increments_a,
                  const Eigen::VectorXd& increments_b, int lags = 10);

}  // namespace sos::risk
