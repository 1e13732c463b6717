#pragma once

// Linear-Gaussian AR(1) state space used as an exact oracle:
//   x_t = a x_{t-1} + sigma_w w_t,   r_t = x_t + sigma_v v_t,
// with the stationary prior x_0 ~ N(0, sigma_w^2 / (1 - a^2)).
// The Kalman recursion below gives the exact filtered means/variances and
// log-likelihood; the adapter at the bottom exposes the same model to the
// particle filter through pseudo-observation sampling only.

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "sos/filter.hpp"
#include "sos/random.hpp"

namespace testsupport {

struct LGParams {
  double a = 0.9;
  double sigma_w = 1.0;
  double sigma_v = 0.5;
  double stationary_var() const { return sigma_w * sigma_w / (1.0 - a * a); }
};

struct KalmanResult {
  std::vector<double> mean;      // E[x_t | r_1..r_t]
  std::vector<double> variance;  // Var[x_t | r_1..r_t]
  double loglik = 0.0;
};

inline KalmanResult kalman_filter(const Eigen::VectorXd& obs,
                                  const LGParams& p) {
  KalmanResult out;
  double m = 0.0;
  double v = p.stationary_var();
  const double q = p.sigma_w * p.sigma_w;
  const double r = p.sigma_v * p.sigma_v;
  for (Eigen::Index t = 0; t < obs.size(); ++t) {
    const double m_pred = p.a * m;
    const double v_pred = p.a * p.a * v + q;
    const double s = v_pred + r;
    const double innov = obs(t) - m_pred;
    out.loglik += -0.5 * (std::log(2.0 * M_PI * s) + innov * innov / s);
    const double gain = v_pred / s;
    m = m_pred + gain * innov;
    v = (1.0 - gain) * v_pred;
    out.mean.push_back(m);
    out.variance.push_back(v);
  }
  return out;
}

class LGModel final : public sos::StateModel<double> {
 public:
  explicit LGModel(const LGParams& p) : p_(p) {}
  int obs_dim() const override { return 1; }
  double sample_prior(sos::RandomStream& rng) const override {
    return std::sqrt(p_.stationary_var()) * rng.normal();
  }
  double sample_pair(const double& prev, const sos::ObservationHistory&,
                     sos::RandomStream& rng,
                     Eigen::Ref<Eigen::VectorXd> obs_out) const override {
    const double next = p_.a * prev + p_.sigma_w * rng.normal();
    obs_out(0) = next + p_.sigma_v * rng.normal();
    return next;
  }

 private:
  LGParams p_;
};

// Simulates a joint (state, observation) path for oracle comparisons.
inline Eigen::VectorXd simulate_lg(const LGParams& p, long t_max,
                                   std::uint64_t seed) {
  sos::RandomStream rs(seed, 0xA5A5A5A5u, 1u);
  double x = std::sqrt(p.stationary_var()) * rs.normal();
  Eigen::VectorXd obs(t_max);
  for (long t = 0; t < t_max; ++t) {
    x = p.a * x + p.sigma_w * rs.normal();
    obs(t) = x + p.sigma_v * rs.normal();
  }
  return obs;
}

}  // namespace testsupport
