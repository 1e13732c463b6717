#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <Eigen/Cholesky>
#include <cmath>

#include "sos/indirect_inference.hpp"
#include "sos/random.hpp"

using namespace sos::ii;
using sos::econ::StructuralParams;

namespace {

StructuralParams calibrated(int kbar, double sigma_delta = 1.0) {
  StructuralParams p;
  p.kbar = kbar;
  p.sigma_delta = sigma_delta;
  return sos::econ::calibrate(p);
}

}  // namespace

TEST_CASE("completion statistic names round-trip") {
  CHECK(eta_from_name("median") == EtaKind::median);
  CHECK(eta_from_name("third-moment") == EtaKind::third_moment);
  CHECK(eta_from_name("third_moment") == EtaKind::third_moment);
  CHECK(eta_name(EtaKind::median) == "median");
  CHECK(eta_name(EtaKind::third_moment) == "third-moment");
  CHECK_THROWS_AS(eta_from_name("mean"), sos::ConfigError);
}

TEST_CASE("completion statistics compute hand values") {
  Eigen::VectorXd r(4);
  r << 3.0, 1.0, 4.0, 2.0;
  CHECK(eta_statistic(r, EtaKind::median) == 2.0);  // lower middle
  CHECK(eta_statistic(r, EtaKind::third_moment) ==
        doctest::Approx((27.0 + 1.0 + 64.0 + 8.0) / 4.0).epsilon(1e-14));
  Eigen::VectorXd odd(3);
  odd << -1.0, 5.0, 0.0;
  CHECK(eta_statistic(odd, EtaKind::median) == 0.0);
}

TEST_CASE("lag-window covariance matches hand-computed values") {
  Eigen::MatrixXd psi(4, 2);
  psi << 1.0, 0.5, 2.0, -1.0, 0.5, 0.25, -1.0, 1.5;

  const Eigen::MatrixXd l0 = newey_west(psi, 0);
  CHECK(l0(0, 0) == doctest::Approx(1.5625).epsilon(1e-14));
  CHECK(l0(0, 1) == doctest::Approx(-0.71875).epsilon(1e-14));
  CHECK(l0(1, 0) == doctest::Approx(-0.71875).epsilon(1e-14));
  CHECK(l0(1, 1) == doctest::Approx(0.890625).epsilon(1e-14));

  const Eigen::MatrixXd l1 = newey_west(psi, 1);
  CHECK(l1(0, 0) == doctest::Approx(2.1875).epsilon(1e-14));
  CHECK(l1(0, 1) == doctest::Approx(-0.65625).epsilon(1e-14));
  CHECK(l1(1, 1) == doctest::Approx(0.796875).epsilon(1e-14));

  const Eigen::MatrixXd l2 = newey_west(psi, 2);
  CHECK(l2(0, 0) == doctest::Approx(2.1458333333333335).epsilon(1e-14));
  CHECK(l2(0, 1) == doctest::Approx(-0.2604166666666666).epsilon(1e-13));
  CHECK(l2(1, 1) == doctest::Approx(0.5364583333333333).epsilon(1e-14));

  Eigen::MatrixXd scalar(3, 1);
  scalar << 1.0, 2.0, 3.0;
  CHECK(newey_west(scalar, 1)(0, 0) ==
        doctest::Approx(7.333333333333334).epsilon(1e-14));
}

TEST_CASE("lag-window covariance of independent noise is near unity") {
  sos::RandomStream rs(2718, 0, 0);
  Eigen::MatrixXd psi(5000, 1);
  for (int t = 0; t < 5000; ++t) psi(t, 0) = rs.normal();
  psi.array() -= psi.mean();
  const double lrv = newey_west(psi, 10)(0, 0);
  CHECK(lrv == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("lag-window covariance rejects bad window sizes") {
  Eigen::MatrixXd psi(5, 1);
  psi.setOnes();
  CHECK_THROWS_AS(newey_west(psi, -1), sos::InvalidArgument);
  CHECK_THROWS_AS(newey_west(psi, 5), sos::InvalidArgument);
}

TEST_CASE("benchmark moments compute hand values") {
  Eigen::VectorXd r(3);
  r << 1.0, -1.0, 2.0;
  const Eigen::Vector4d m = smm_moments(r);
  CHECK(m(0) == doctest::Approx(2.0).epsilon(1e-14));        // mean square
  CHECK(m(1) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));  // mean cube
  CHECK(m(2) == doctest::Approx(6.0).epsilon(1e-14));        // mean fourth
  CHECK(m(3) == doctest::Approx(-1.5).epsilon(1e-14));       // lagged square
}

TEST_CASE("auxiliary fit needs a minimum sample") {
  Eigen::VectorXd tiny = Eigen::VectorXd::Constant(50, 0.001);
  const auto tmpl = sos::fi::FIParams::from_structural(calibrated(2));
  CHECK_THROWS_AS(
      auxiliary_estimator(tiny, EtaKind::median, tmpl, AuxOptions{}),
      sos::InsufficientSampleError);
}

TEST_CASE("quadratic objective rejects non positive definite weights") {
  const StructuralParams theta = calibrated(2);
  Eigen::Matrix4d indefinite = -Eigen::Matrix4d::Identity();
  CHECK_THROWS_AS(ii_objective(theta, Eigen::Vector4d::Zero(), 1, 200,
                               indefinite, 3, EtaKind::median),
                  sos::InvalidArgument);
  Eigen::Matrix4d asym = Eigen::Matrix4d::Identity();
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(ii_objective(theta, Eigen::Vector4d::Zero(), 1, 200, asym,
                               3, EtaKind::median),
                  sos::InvalidArgument);
}

TEST_CASE("median score column sums to at most one in magnitude") {
  const auto tmpl = sos::fi::FIParams::from_structural(calibrated(2));
  const Eigen::VectorXd r = sos::econ::simulate_returns(calibrated(2), 600, 21);
  const AuxiliaryEstimate aux =
      auxiliary_estimator(r, EtaKind::median, tmpl, AuxOptions{});
  const Eigen::MatrixXd s = auxiliary_scores(r, aux);
  REQUIRE(s.cols() == 4);
  REQUIRE(s.rows() == 600);
  // sign(r - median) sums to -1, 0 or 1 by the order-statistic convention.
  const double sum = s.col(3).sum();
  CHECK(std::abs(sum) <= 1.0 + 1e-12);
  // Every entry of the sign column is -1, 0, or 1.
  for (long t = 0; t < s.rows(); ++t) {
    const double v = s(t, 3);
    CHECK((v == 1.0 || v == -1.0 || v == 0.0));
  }
}

TEST_CASE("third-moment score column is the centered cube") {
  const auto tmpl = sos::fi::FIParams::from_structural(calibrated(2));
  const Eigen::VectorXd r =
      sos::econ::simulate_returns(calibrated(2), 400, 33);
  const AuxiliaryEstimate aux =
      auxiliary_estimator(r, EtaKind::third_moment, tmpl, AuxOptions{});
  const Eigen::MatrixXd s = auxiliary_scores(r, aux);
  for (long t = 0; t < 5; ++t) {
    CHECK(s(t, 3) ==
          doctest::Approx(std::pow(r(t), 3) - aux.eta).epsilon(1e-12));
  }
  // The estimating equation is exactly solved at the fitted statistic.
  CHECK(s.col(3).sum() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("estimator covariance carries the simulation penalty exactly") {
  // (1 + 1/s) enters multiplicatively: halving the simulation multiple from
  // infinity toward one inflates the covariance by a known exact factor.
  Eigen::Matrix4d jac = Eigen::Matrix4d::Identity();
  jac(0, 1) = 0.2;
  jac(2, 3) = -0.4;
  jac(3, 3) = 2.0;
  Eigen::Matrix4d wstar = Eigen::Matrix4d::Identity() * 0.7;
  wstar(1, 2) = wstar(2, 1) = 0.1;
  const Eigen::Vector4d scale(0.21, 0.0564, 1.0, 1.0);
  const Eigen::Matrix4d c1 = ii_covariance(jac, wstar, scale, 1, 5000);
  const Eigen::Matrix4d c2 = ii_covariance(jac, wstar, scale, 2, 5000);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(c2(i, j) == doctest::Approx(0.75 * c1(i, j)).epsilon(1e-12));

  // Doubling the sample halves the covariance.
  const Eigen::Matrix4d half = ii_covariance(jac, wstar, scale, 1, 10000);
  CHECK(half(0, 0) == doctest::Approx(0.5 * c1(0, 0)).epsilon(1e-12));

  // Symmetric positive semidefinite output.
  const Eigen::Matrix4d sym = c1 - c1.transpose();
  CHECK(sym.cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::LLT<Eigen::Matrix4d> llt(
      c1 + 1e-18 * Eigen::Matrix4d::Identity());
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("unconstrained structural coordinates round-trip") {
  StructuralParams p = calibrated(3);
  p.m0 = 1.31;
  p.gamma_kbar = 0.2;
  p.b = 5.5;
  p.sigma_delta = 0.42;
  const Eigen::Vector4d z = theta_to_unconstrained(p);
  const StructuralParams back = theta_from_unconstrained(z, p);
  CHECK(back.m0 == doctest::Approx(1.31).epsilon(1e-10));
  CHECK(back.gamma_kbar == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(back.b == doctest::Approx(5.5).epsilon(1e-10));
  CHECK(back.sigma_delta == doctest::Approx(0.42).epsilon(1e-10));
  CHECK(back.kbar == p.kbar);
  CHECK(back.alpha == p.alpha);
  // Arbitrary coordinates always land inside the admissible region.
  const StructuralParams wild =
      theta_from_unconstrained({40.0, -40.0, 25.0, -25.0}, p);
  CHECK_NOTHROW(wild.validate());
}

TEST_CASE("binding function is deterministic under common random numbers") {
  const StructuralParams theta = calibrated(2, 0.7);
  AuxOptions opts;
  opts.mle.starts = 1;
  const AuxiliaryEstimate a =
      binding_function(theta, 2, 300, 17, EtaKind::median, opts);
  const AuxiliaryEstimate b =
      binding_function(theta, 2, 300, 17, EtaKind::median, opts);
  CHECK(a.eta == b.eta);
  CHECK(a.fi.params.m0 == b.fi.params.m0);
  CHECK((a.as_vector() - b.as_vector()).cwiseAbs().maxCoeff() == 0.0);
  // Needs a calibrated template.
  StructuralParams uncal = theta;
  uncal.alpha = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(binding_function(uncal, 2, 300, 17, EtaKind::median, opts),
                  sos::InvalidArgument);
}

TEST_CASE("observed-state standard errors shrink with the sample") {
  const StructuralParams p = calibrated(2);
  const auto fip = sos::fi::FIParams::from_structural(p);
  const Eigen::VectorXd r = sos::fi::simulate_returns(fip, 4000, 3);
  const Eigen::Vector3d se_full = fi_standard_errors(r, fip, 10);
  const Eigen::Vector3d se_half =
      fi_standard_errors(r.head(1000), fip, 10);
  for (int k = 0; k < 3; ++k) {
    CHECK(se_full(k) > 0.0);
    CHECK(se_full(k) < se_half(k));
  }
}

TEST_CASE("score objective vanishes at a path's own fitted statistic") {
  // The average auxiliary score of a simulated path, evaluated at that same
  // path's fitted auxiliary statistic, is the first-order condition of the
  // inner fit and must be numerically zero. With the same seed the score
  // objective reuses the identical path, making the identity exact up to the
  // inner optimizer's tolerance.
  const StructuralParams theta = calibrated(2, 0.9);
  const long s = 3, t = 700;
  const std::uint64_t seed = 14;
  AuxOptions opts;
  opts.mle.starts = 2;
  const AuxiliaryEstimate self =
      binding_function(theta, s, t, seed, EtaKind::median, opts);
  const double at_self = emm_objective(theta, self, s, t,
                                       Eigen::Matrix4d::Identity(), seed);
  CHECK(at_self < 1e-4);

  // A statistic fitted elsewhere scores far worse on the same path.
  const AuxiliaryEstimate other = binding_function(
      calibrated(2, 0.25), s, t, seed + 5, EtaKind::median, opts);
  const double at_other = emm_objective(theta, other, s, t,
                                        Eigen::Matrix4d::Identity(), seed);
  CHECK(at_self < at_other);
}

TEST_CASE("estimation recovers parameters at desk scale") {
  const StructuralParams truth = calibrated(2, 0.8);
  const Eigen::VectorXd r = sos::econ::simulate_returns(truth, 2500, 42);
  IIOptions opts;
  opts.s = 4;
  opts.seed = 91;
  opts.tmpl = truth;
  opts.max_evals = 80;
  const IIResult fit = estimate_ii(r, opts);
  // Loose desk-scale tolerances; the acceptance study runs the full design.
  CHECK(fit.theta.m0 == doctest::Approx(truth.m0).epsilon(0.15));
  CHECK(fit.theta.sigma_delta ==
        doctest::Approx(truth.sigma_delta).epsilon(0.8));
  CHECK(fit.objective < 0.05);
  CHECK(fit.std_errors.minCoeff() > 0.0);
  CHECK(fit.covariance(0, 0) ==
        doctest::Approx(fit.std_errors(0) * fit.std_errors(0))
            .epsilon(1e-10));
  // The auxiliary statistic of the data is reported alongside.
  CHECK(fit.mu_data(0) == doctest::Approx(fit.data_aux.fi.params.m0));
}

TEST_CASE("benchmark estimator runs the same interface") {
  const StructuralParams truth = calibrated(2, 1.0);
  const Eigen::VectorXd r = sos::econ::simulate_returns(truth, 2000, 55);
  IIOptions opts;
  opts.s = 3;
  opts.seed = 10;
  opts.tmpl = truth;
  opts.max_evals = 150;
  const IIResult fit = estimate_smm(r, opts);
  CHECK(fit.objective >= 0.0);
  CHECK(fit.theta.m0 > 1.0);
  CHECK(fit.theta.m0 < 2.0);
  CHECK(fit.std_errors.allFinite());
  CHECK(fit.std_errors.minCoeff() > 0.0);
}
