#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "sos/full_information.hpp"
#include "sos/stats.hpp"

using namespace sos::fi;

namespace {

FIParams calibrated(int kbar) {
  FIParams p;
  p.kbar = kbar;
  return calibrate(p);
}

// Likelihood by brute-force path enumeration: sum over all d^T state paths of
// the uniform initial weight, the transition products, and the Gaussian
// observation terms. Exponential in T, so only viable for tiny cases - which
// is exactly what makes it an independent check of the forward recursion.
double enumeration_loglik(const Eigen::VectorXd& returns, const FIParams& p) {
  const FIModel model(p);
  const int d = p.n_states();
  const long t_max = returns.size();
  const Eigen::MatrixXd& a = model.transition();
  double total = 0.0;
  std::vector<int> path(static_cast<std::size_t>(t_max), 0);
  for (;;) {
    // One path: uniform start, then transitions i_{t-1} -> i_t with the
    // observation emitted by the arrival state.
    for (int start = 0; start < d; ++start) {
      double prob = 1.0 / d;
      int prev = start;
      for (long t = 0; t < t_max; ++t) {
        const int cur = path[static_cast<std::size_t>(t)];
        prob *= a(prev, cur) * model.density(prev, cur, returns(t));
        prev = cur;
      }
      total += prob;
    }
    // Odometer increment over the d^T path space.
    long pos = 0;
    while (pos < t_max && ++path[static_cast<std::size_t>(pos)] == d) {
      path[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == t_max) break;
  }
  return std::log(total);
}

}  // namespace

TEST_CASE("forward recursion equals brute-force path enumeration") {
  const FIParams p = calibrated(1);
  Eigen::VectorXd r(6);
  r << 0.002, -0.013, 0.0004, 0.021, -0.006, 0.0101;
  const double direct = enumeration_loglik(r, p);
  const FIFilterResult rec = fi_filter(r, p);
  CHECK(rec.loglik == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("likelihood matches an independently coded recursion") {
  // Frozen values from a from-scratch implementation of the same model
  // (transition, pricing fixed point, Gaussian mixture recursion) in another
  // language, at the default calibration.
  Eigen::VectorXd r(8);
  r << 0.004, -0.011, 0.0003, 0.0199, -0.0087, 0.0, 0.0142, -0.0051;
  CHECK(fi_filter(r, calibrated(1)).loglik ==
        doctest::Approx(24.406208833251505).epsilon(1e-9));
  CHECK(fi_filter(r, calibrated(2)).loglik ==
        doctest::Approx(23.700035784848616).epsilon(1e-9));
}

TEST_CASE("filter outputs well-formed increments and posteriors") {
  const FIParams p = calibrated(2);
  const Eigen::VectorXd r = simulate_returns(p, 500, 77);
  const FIFilterResult res = fi_filter(r, p);
  REQUIRE(res.increments.size() == 500);
  REQUIRE(res.posterior.rows() == 500);
  double acc = 0.0;
  for (long t = 0; t < 500; ++t) {
    CHECK(res.increments(t) > 0.0);
    acc += std::log(res.increments(t));
    CHECK(res.posterior.row(t).sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.posterior.row(t).minCoeff() >= 0.0);
  }
  CHECK(res.loglik == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("conditional return density integrates to one") {
  const FIParams p = calibrated(1);
  const FIModel model(p);
  // Trapezoid over +-8 sd around the conditional mean.
  const double sd = model.volatilities()(1);
  const double mu = model.mean(0, 1);
  const int n = 4000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = mu - 8.0 * sd + 16.0 * sd * i / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * model.density(0, 1, x);
  }
  acc *= 16.0 * sd / n;
  CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("conditional means embed the valuation ratio move") {
  const FIParams p = calibrated(1);
  const FIModel model(p);
  const Eigen::VectorXd& q = model.pd();
  const double expect = std::log((1.0 + q(1)) / q(0)) + p.g_d - p.r_f -
                        0.5 * model.volatilities()(1) *
                            model.volatilities()(1);
  CHECK(model.mean(0, 1) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("unconstrained coordinates round-trip") {
  FIParams p = calibrated(3);
  p.m0 = 1.55;
  p.gamma_kbar = 0.11;
  p.b = 3.7;
  const Eigen::Vector3d z = to_unconstrained(p);
  const FIParams back = from_unconstrained(z, p);
  CHECK(back.m0 == doctest::Approx(1.55).epsilon(1e-12));
  CHECK(back.gamma_kbar == doctest::Approx(0.11).epsilon(1e-12));
  CHECK(back.b == doctest::Approx(3.7).epsilon(1e-12));
  // Any finite coordinate vector maps to a valid interior parameter point.
  const FIParams wild = from_unconstrained({50.0, -50.0, 30.0}, p);
  CHECK_NOTHROW(wild.validate());
  CHECK(wild.m0 < 2.0);
  CHECK(wild.gamma_kbar > 0.0);
  CHECK(wild.b > 1.0);
}

TEST_CASE("simulated observed-state returns are deterministic") {
  const FIParams p = calibrated(2);
  const Eigen::VectorXd a = simulate_returns(p, 300, 5);
  const Eigen::VectorXd b = simulate_returns(p, 300, 5);
  const Eigen::VectorXd c = simulate_returns(p, 300, 6);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.allFinite());
}

TEST_CASE("score rows sum to a finite-difference gradient") {
  const FIParams p = calibrated(2);
  const Eigen::VectorXd r = simulate_returns(p, 400, 13);
  const Eigen::MatrixXd s = fi_score(r, p);
  REQUIRE(s.rows() == 400);
  REQUIRE(s.cols() == 3);
  const Eigen::Vector3d total = s.colwise().sum().transpose();

  // Independent coarse finite difference of the full log-likelihood in the
  // unconstrained coordinates.
  const Eigen::Vector3d z0 = to_unconstrained(p);
  for (int k = 0; k < 3; ++k) {
    const double dz = 1e-4;
    Eigen::Vector3d zp = z0, zm = z0;
    zp(k) += dz;
    zm(k) -= dz;
    const double up = fi_filter(r, from_unconstrained(zp, p)).loglik;
    const double dn = fi_filter(r, from_unconstrained(zm, p)).loglik;
    const double fd = (up - dn) / (2.0 * dz);
    CHECK(total(k) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("maximum likelihood recovers the generator on a long path") {
  const FIParams truth = calibrated(2);
  const Eigen::VectorXd r = simulate_returns(truth, 6000, 31);
  FIMleOptions opts;
  opts.starts = 3;
  opts.seed = 4;
  const FIMleResult fit = fi_mle(r, truth, opts);
  CHECK(fit.loglik >= fi_filter(r, truth).loglik - 1e-6);
  CHECK(fit.params.m0 == doctest::Approx(truth.m0).epsilon(0.05));
  CHECK(fit.params.gamma_kbar ==
        doctest::Approx(truth.gamma_kbar).epsilon(0.8));
  CHECK(fit.params.b > 1.0);
  CHECK(fit.best_start >= 0);
  CHECK(fit.starts.size() == 3);
  // The optimum must dominate every start's reported value.
  for (const auto& s : fit.starts) CHECK(fit.loglik >= s.loglik - 1e-9);
}

TEST_CASE("structural conversion preserves every field") {
  const FIParams p = calibrated(3);
  const sos::econ::StructuralParams sp = p.to_structural(0.25);
  CHECK(sp.sigma_delta == 0.25);
  CHECK(sp.m0 == p.m0);
  CHECK(sp.alpha == p.alpha);
  const FIParams back = FIParams::from_structural(sp);
  CHECK(back.m0 == p.m0);
  CHECK(back.gamma_kbar == p.gamma_kbar);
  CHECK(back.b == p.b);
  CHECK(back.kbar == p.kbar);
  CHECK(back.alpha == p.alpha);
}

TEST_CASE("observed-state model exposes a sampling adapter") {
  const FIParams p = calibrated(2);
  const auto model = as_state_model(p);
  CHECK(model->obs_dim() == 1);
  sos::RandomStream rs(3, 0, 0);
  const int s0 = model->sample_prior(rs);
  CHECK(s0 >= 0);
  CHECK(s0 < 4);
  Eigen::VectorXd obs(1);
  sos::ObservationHistory empty;
  sos::RandomStream rs2(3, 1, 0);
  const int s1 = model->sample_pair(s0, empty, rs2, obs);
  CHECK(s1 >= 0);
  CHECK(s1 < 4);
  CHECK(std::isfinite(obs(0)));
}
