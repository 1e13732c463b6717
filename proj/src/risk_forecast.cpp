#include "sos/risk_forecast.hpp"

#include <cmath>
#include <vector>

#include "sos/indirect_inference.hpp"

namespace sos::risk {

VaRForecast var_from_draws(std::vector<double> draws, int horizon, double p,
                           long t_index) {
  if (!(p > 0.0) || !(p < 1.0))
    throw InvalidArgument("var_from_draws: level must lie in (0,1)");
  if (static_cast<double>(draws.size()) * p < 100.0)
    throw InsufficientSampleError(
        "var_from_draws: pooled predictive sample is below 100/p draws");
  VaRForecast out;
  out.t = t_index;
  out.horizon = horizon;
  out.level = p;
  out.value = -quantile_interpolated(std::move(draws), p);
  return out;
}

VaRForecast historical_var(const Eigen::VectorXd& returns, long t, int window,
                           double p) {
  if (window < 1)
    throw InvalidArgument("historical_var: window must be >= 1");
  if (!(p > 0.0) || !(p < 1.0))
    throw InvalidArgument("historical_var: level must lie in (0,1)");
  if (t < window || t > returns.size())
    throw InvalidArgument(
        "historical_var: day index leaves an incomplete window");
  std::vector<double> tail(returns.data() + (t - window), returns.data() + t);
  VaRForecast out;
  out.t = t;
  out.horizon = 1;
  out.level = p;
  out.value = -quantile_interpolated(std::move(tail), p);
  return out;
}

BacktestReport failure_rate(const Eigen::VectorXd& realized,
                            const std::vector<VaRForecast>& forecasts,
                            int hac_lags) {
  const long n = realized.size();
  if (n != static_cast<long>(forecasts.size()))
    throw InvalidArgument("failure_rate: series lengths differ");
  if (n < 1) throw InvalidArgument("failure_rate: empty backtest");
  const double level = forecasts.front().level;
  const int horizon = forecasts.front().horizon;
  for (const VaRForecast& f : forecasts)
    if (f.level != level || f.horizon != horizon)
      throw InvalidArgument(
          "failure_rate: forecasts mix levels or horizons");

  Eigen::VectorXd hit(n);
  for (long i = 0; i < n; ++i)
    hit(i) = realized(i) < -forecasts[static_cast<std::size_t>(i)].value
                 ? 1.0
                 : 0.0;
  const double rate = hit.mean();

  double se = 0.0;
  if (hac_lags <= 0) {
    se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(n));
  } else {
    const Eigen::MatrixXd psi = hit.array() - rate;
    const double lrv = ii::newey_west(psi, hac_lags)(0, 0);
    se = std::sqrt(std::max(lrv, 0.0) / static_cast<double>(n));
  }

  BacktestReport out;
  out.level = level;
  out.horizon = horizon;
  out.n = n;
  out.failure_rate = rate;
  out.std_error = se;
  const double z = inverse_normal_cdf(0.995);
  out.reject_at_1pct = std::abs(rate - level) > z * se;
  return out;
}

double vuong_test(const Eigen::VectorXd& increments_a,
                  const Eigen::VectorXd& increments_b, int lags) {
  if (increments_a.size() != increments_b.size())
    throw InvalidArgument("vuong_test: series lengths differ");
  const long t = increments_a.size();
  if (t < 2) throw InvalidArgument("vuong_test: need at least 2 increments");
  const Eigen::VectorXd d = increments_a - increments_b;
  const double dbar = d.mean();
  const Eigen::MatrixXd psi = d.array() - dbar;
  const double lrv = ii::newey_west(psi, lags)(0, 0);
  if (!(lrv > 0.0))
    throw DegenerateTestError(
        "vuong_test: likelihood difference has no variance");
  return std::sqrt(static_cast<double>(t)) * dbar / std::sqrt(lrv);
}

}  // namespace sos::risk
