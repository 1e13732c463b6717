#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sos/quadrature.hpp"

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("real-line rule integrates the Gaussian density to one") {
  const auto res = sos::integrate_real_line([](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  });
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.error_estimate < 1e-10);
}

TEST_CASE("real-line rule recovers the Gaussian second moment") {
  const auto res = sos::integrate_real_line([](double x) {
    return x * x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  });
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("real-line rule handles polynomially decaying tails") {
  // integral of (1+x^2)^-2 over R equals pi/2; the tails only decay like
  // x^-4, which is the regime the node transform is built for.
  const auto res = sos::integrate_real_line(
      [](double x) { return 1.0 / ((1.0 + x * x) * (1.0 + x * x)); });
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(kPi / 2.0).epsilon(1e-12));

  // Second moment of the same function: integral x^2 (1+x^2)^-2 = pi/2.
  const auto res2 = sos::integrate_real_line([](double x) {
    return x * x / ((1.0 + x * x) * (1.0 + x * x));
  });
  CHECK(res2.converged);
  CHECK(res2.value == doctest::Approx(kPi / 2.0).epsilon(1e-10));
}

TEST_CASE("odd integrands vanish on the real line") {
  const auto res = sos::integrate_real_line(
      [](double x) { return x * std::exp(-0.5 * x * x); });
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("interval rule matches closed forms") {
  const auto cubic = sos::integrate_interval(
      [](double x) { return x * x * x; }, 0.0, 1.0);
  CHECK(cubic.converged);
  CHECK(cubic.value == doctest::Approx(0.25).epsilon(1e-13));

  const auto sine =
      sos::integrate_interval([](double x) { return std::sin(x); }, 0.0, kPi);
  CHECK(sine.converged);
  CHECK(sine.value == doctest::Approx(2.0).epsilon(1e-13));

  // Endpoint-singular integrand: integral of 1/sqrt(x) on (0,1] equals 2.
  const auto root = sos::integrate_interval(
      [](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(root.converged);
  CHECK(root.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("plane rule integrates a product density to one") {
  const auto res = sos::integrate_plane([](double x, double y) {
    return std::exp(-0.5 * (x * x + y * y)) / (2.0 * kPi);
  });
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("plane rule recovers a mixed moment") {
  // E[x^2] under the standard bivariate normal equals one.
  const auto res = sos::integrate_plane([](double x, double y) {
    return x * x * std::exp(-0.5 * (x * x + y * y)) / (2.0 * kPi);
  });
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-8));
}
