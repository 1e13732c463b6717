#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cmath>

#include "sos/errors.hpp"
#include "sos/kernels.hpp"
#include "sos/quadrature.hpp"

using sos::BandwidthPolicy;
using sos::Kernel;

TEST_CASE("stored kernel constants match closed forms") {
  const Kernel g1 = Kernel::gaussian(1);
  CHECK(g1.second_moment() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g1.squared_mass() ==
        doctest::Approx(0.28209479177387814).epsilon(1e-15));

  const Kernel g2 = Kernel::gaussian(2);
  CHECK(g2.second_moment() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g2.squared_mass() ==
        doctest::Approx(0.079577471545947668).epsilon(1e-15));

  const Kernel qc = Kernel::quasi_cauchy();
  CHECK(qc.second_moment() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(qc.squared_mass() ==
        doctest::Approx(0.39788735772973834).epsilon(1e-15));
}

TEST_CASE("kernel densities evaluate to hand values") {
  const Kernel g1 = Kernel::gaussian(1);
  CHECK(g1.density1(0.0) ==
        doctest::Approx(0.39894228040143268).epsilon(1e-15));
  CHECK(g1.density1(1.0) ==
        doctest::Approx(0.24197072451914335).epsilon(1e-15));

  const Kernel qc = Kernel::quasi_cauchy();
  CHECK(qc.density1(0.0) ==
        doctest::Approx(0.63661977236758134).epsilon(1e-15));
  // (2/pi) (1+1)^-2 at u = 1.
  CHECK(qc.density1(1.0) ==
        doctest::Approx(0.63661977236758134 / 4.0).epsilon(1e-15));

  const Kernel g2 = Kernel::gaussian(2);
  Eigen::VectorXd u(2);
  u << 0.0, 1.0;
  CHECK(g2(u) == doctest::Approx(0.39894228040143268 * 0.24197072451914335)
                     .epsilon(1e-14));
}

TEST_CASE("quadrature verifies unit mass zero mean and both constants") {
  for (const Kernel& k : {Kernel::gaussian(1), Kernel::quasi_cauchy()}) {
    const auto mass = sos::integrate_real_line(
        [&](double u) { return k.density1(u); });
    CHECK(mass.converged);
    CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-10));

    const auto mean = sos::integrate_real_line(
        [&](double u) { return u * k.density1(u); });
    CHECK(std::abs(mean.value) < 1e-10);

    const auto [a, b] = sos::kernel_constants(k);
    CHECK(a == doctest::Approx(k.second_moment()).epsilon(1e-8));
    CHECK(b == doctest::Approx(k.squared_mass()).epsilon(1e-8));
  }
  // The two-coordinate product kernel, cross-checked on the plane.
  const auto [a2, b2] = sos::kernel_constants(Kernel::gaussian(2));
  CHECK(a2 == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(b2 == doctest::Approx(0.079577471545947668).epsilon(1e-7));
}

TEST_CASE("scaled kernels divide by bandwidth to the dimension") {
  const Kernel g1 = Kernel::gaussian(1);
  CHECK(g1.scaled1(2.0, 1.0) ==
        doctest::Approx(g1.density1(0.5) / 2.0).epsilon(1e-15));

  const Kernel g2 = Kernel::gaussian(2);
  Eigen::VectorXd diff(2);
  diff << 0.5, -0.5;
  CHECK(g2.scaled(0.5, diff) ==
        doctest::Approx(g2(diff / 0.5) / 0.25).epsilon(1e-13));

  Eigen::MatrixXd diffs(3, 1);
  diffs << -1.0, 0.0, 1.0;
  const Eigen::VectorXd batch = g1.scaled_batch(1.0, diffs);
  CHECK(batch(0) == doctest::Approx(g1.density1(1.0)).epsilon(1e-15));
  CHECK(batch(1) == doctest::Approx(g1.density1(0.0)).epsilon(1e-15));
  CHECK(batch(2) == batch(0));
}

TEST_CASE("kernel lookup by name") {
  CHECK(Kernel::from_name("gaussian", 2).dim() == 2);
  CHECK(Kernel::from_name("quasi_cauchy").family() ==
        sos::KernelFamily::quasi_cauchy);
  CHECK_THROWS_AS(Kernel::from_name("triangula"), sos::ConfigError);
  // The heavy-tailed kernel is one-dimensional only.
  CHECK_THROWS_AS(Kernel::from_name("quasi_cauchy", 2), sos::ConfigError);
}

TEST_CASE("bandwidth policies resolve as documented") {
  CHECK(sos::bandwidth_value(BandwidthPolicy::fixed(0.07), 1, 1e6) == 0.07);

  // Power law with the default rate-optimal exponent -1/(dim+4).
  const double h = sos::bandwidth_value(BandwidthPolicy::power_law(2.0), 1,
                                        100000.0);
  CHECK(h == doctest::Approx(2.0 * std::pow(100000.0, -0.2)).epsilon(1e-13));

  const double h2 = sos::bandwidth_value(
      BandwidthPolicy::power_law(1.5, -0.3), 1, 1000.0);
  CHECK(h2 == doctest::Approx(1.5 * std::pow(1000.0, -0.3)).epsilon(1e-13));

  const double ha = sos::bandwidth_value(BandwidthPolicy::adaptive_scale(1.4),
                                         1, 10000.0, 0.02);
  CHECK(ha == doctest::Approx(1.4 * 0.02 * std::pow(10000.0, -0.2))
                  .epsilon(1e-13));
}

TEST_CASE("power-law exponents outside the admissible band are rejected") {
  // Valid band for dim 1 is (-1, 0), endpoints excluded.
  CHECK_THROWS_AS(sos::bandwidth_value(BandwidthPolicy::power_law(1.0, 0.1),
                                       1, 100.0),
                  sos::InvalidArgument);
  CHECK_THROWS_AS(sos::bandwidth_value(BandwidthPolicy::power_law(1.0, -1.0),
                                       1, 100.0),
                  sos::InvalidArgument);
  CHECK_THROWS_AS(sos::bandwidth_value(BandwidthPolicy::adaptive_scale(1.0),
                                       1, 100.0),  // missing scale
                  sos::InvalidArgument);
}

TEST_CASE("policy lookup by name") {
  CHECK(BandwidthPolicy::from_name("fixed").mode ==
        BandwidthPolicy::Mode::fixed);
  CHECK(BandwidthPolicy::from_name("power_law").mode ==
        BandwidthPolicy::Mode::power_law);
  CHECK(BandwidthPolicy::from_name("adaptive_scale").mode ==
        BandwidthPolicy::Mode::adaptive_scale);
  CHECK_THROWS_AS(BandwidthPolicy::from_name("adaptive"), sos::ConfigError);
}

TEST_CASE("optimal power-law coefficient scales as the rate theory demands") {
  const Kernel g1 = Kernel::gaussian(1);
  const double base = sos::optimal_power_law_h1(5.0, 40.0, g1);
  CHECK(base > 0.0);
  // h1 ~ kappa^(1/(d+4)) and h1 ~ kappa_prime^(-2/(d+4)).
  CHECK(sos::optimal_power_law_h1(5.0 * 32.0, 40.0, g1) ==
        doctest::Approx(base * 2.0).epsilon(1e-12));
  CHECK(sos::optimal_power_law_h1(5.0, 40.0 * std::pow(2.0, 2.5), g1) ==
        doctest::Approx(base / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(sos::optimal_power_law_h1(-1.0, 1.0, g1),
                  sos::InvalidArgument);
}
