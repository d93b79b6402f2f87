#include <cmath>

#include "doctest.h"
#include "randpress/error.hpp"
#include "randpress/multifractal.hpp"

using namespace randpress;

namespace {
const double kH = std::log(4.0) / std::log(12.0);
const double kP = 0.3;

Potential bernoulli() { return Potential::branch_constant({{std::log(kP), std::log(1.0 - kP)}}); }
double closed_t(double q) { return std::log(std::pow(kP, q) + std::pow(1.0 - kP, q)) / std::log(2.0); }
Potential cantor_phi() {
  const double l = -std::log(2.0);
  return Potential::branch_constant({{l, l}, {l, l}});
}
}  // namespace

TEST_CASE("temperature on the Cantor family is linear") {
  const BaseProcess fair = BaseProcess::iid({0.5, 0.5});
  for (double q : {-2.0, 0.0, 1.0, 2.0}) {
    const TemperatureValue t = temperature(cantor_family(), fair, cantor_phi(), q);
    CHECK(std::abs(t.value - (1.0 - q) * kH) < 1e-6);
  }
}

TEST_CASE("temperature for the doubling map with a Bernoulli potential") {
  const BaseProcess one = BaseProcess::deterministic(0);
  CHECK(std::abs(temperature(doubling_family(), one, bernoulli(), 2.0).value - (-0.785875)) < 1e-3);
  for (double q : {-1.5, 0.5, 1.0, 3.0}) {
    CHECK(std::abs(temperature(doubling_family(), one, bernoulli(), q).value - closed_t(q)) < 1e-6);
  }
}

TEST_CASE("unnormalized potentials are refused") {
  CHECK_THROWS_AS(temperature(doubling_family(), BaseProcess::deterministic(0), Potential::geometric(0.0), 1.0), Error);
}

TEST_CASE("derivatives") {
  const NormalizedPotential phi(doubling_family(), BaseProcess::deterministic(0), bernoulli(), MonteCarlo{});
  const double d0 = (std::log(0.3) + std::log(0.7)) / (2.0 * std::log(2.0));
  const double d1 = (0.3 * std::log(0.3) + 0.7 * std::log(0.7)) / std::log(2.0);
  CHECK(temperature_derivative_fd(phi, 0.0).value == doctest::Approx(d0).epsilon(1e-6));
  const DerivativeCrossCheck x = temperature_derivative(phi, 1.0);
  CHECK(x.finite_difference.value == doctest::Approx(d1).epsilon(1e-5));
  CHECK(x.ratio.value == doctest::Approx(d1).epsilon(1e-5));
  CHECK(x.agree);

  const NormalizedPotential c(cantor_family(), BaseProcess::iid({0.5, 0.5}), cantor_phi(), MonteCarlo{});
  CHECK(temperature_derivative_fd(c, 0.7).value == doctest::Approx(-kH).epsilon(1e-6));
}

TEST_CASE("Legendre spectrum") {
  const std::vector<double> qs{-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
  const TemperatureCurve curve = temperature_curve(doubling_family(), BaseProcess::deterministic(0), bernoulli(), qs);
  const SpectrumResult s = legendre_spectrum(curve);
  CHECK(s.convex);
  CHECK(s.concave);
  CHECK(s.alpha_positive);
  CHECK(s.bounds_ok);
  REQUIRE(s.tangency.has_value());
  CHECK(std::abs(*s.tangency) < 2e-3);
  REQUIRE(s.peak_gap.has_value());
  CHECK(std::abs(*s.peak_gap) < 2e-3);
  bool saw0 = false, saw1 = false;
  for (const auto& p : s.points) {
    if (p.q == 0.0) {
      saw0 = true;
      CHECK(p.alpha == doctest::Approx(1.1257678).epsilon(1e-5));
      CHECK(p.g == doctest::Approx(1.0).epsilon(1e-8));
    }
    if (p.q == 1.0) {
      saw1 = true;
      CHECK(p.alpha == doctest::Approx(0.881291).epsilon(1e-5));
      CHECK(p.g == doctest::Approx(p.alpha).epsilon(1e-6));
    }
  }
  CHECK(saw0);
  CHECK(saw1);

  const TemperatureCurve flat =
      temperature_curve(cantor_family(), BaseProcess::iid({0.5, 0.5}), cantor_phi(), {-1.0, 0.0, 1.0, 2.0});
  const SpectrumResult one = legendre_spectrum(flat);
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].alpha == doctest::Approx(kH).epsilon(1e-6));
  CHECK(one.points[0].g == doctest::Approx(kH).epsilon(1e-6));
}

TEST_CASE("non-convex input is refused") {
  TemperatureCurve bad;
  bad.q = {0.0, 1.0, 2.0};
  bad.value = {1.0, 1.5, 0.0};
  bad.derivative = {0.5, -0.5, -1.5};
  bad.derivative_error = {0.0, 0.0, 0.0};
  bad.tolerance = 1e-10;
  bad.exact = true;
  CHECK_THROWS_AS(legendre_spectrum(bad), Error);
}
