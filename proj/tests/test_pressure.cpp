#include <cmath>

#include "doctest.h"
#include "randpress/pressure.hpp"

using namespace randpress;

namespace {
const double kH = std::log(4.0) / std::log(12.0);
}

TEST_CASE("pressure traces") {
  const SymbolPath alt = sample_path(BaseProcess::periodic({0, 1}), 64, 0, 1);
  const PressureTrace a = pressure_trace(cantor_family(), alt, Potential::geometric(kH), 4);
  CHECK(std::abs(a.sum(4)) < 1e-10);
  const SymbolPath one = sample_path(BaseProcess::deterministic(1), 64, 0, 1);
  const PressureTrace b = pressure_trace(cantor_family(), one, Potential::geometric(0.5), 5);
  for (double v : b.values) CHECK(std::abs(v) < 1e-12);
  const PressureTrace z = pressure_trace(mean_example_family(), alt, Potential::geometric(0.0), 5);
  for (double v : z.values) CHECK(v == doctest::Approx(std::log(2.0)));
}

TEST_CASE("expected pressure by Monte Carlo") {
  MonteCarlo mc;
  mc.n_steps = 100;
  mc.n_samples = 100;
  mc.prefer_exact = false;
  const BaseProcess fair = BaseProcess::iid({0.5, 0.5});
  const ExpectedPressureEstimate e1 = expected_pressure(cantor_family(), fair, Potential::geometric(1.0), mc);
  CHECK(std::abs(e1.value - (std::log(2.0) - 0.5 * std::log(12.0))) <= 3.0 * e1.std_error);
  const ExpectedPressureEstimate eh = expected_pressure(cantor_family(), fair, Potential::geometric(kH), mc);
  CHECK(std::abs(eh.value) <= 3.0 * eh.std_error);
  const ExpectedPressureEstimate e0 =
      expected_pressure(cantor_family(), BaseProcess::deterministic(0), Potential::geometric(0.0), mc);
  CHECK(e0.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(e0.std_error == 0.0);
}

TEST_CASE("exact symbol-local expectation") {
  const auto e = exact_expected_pressure(cantor_family(), BaseProcess::iid({0.5, 0.5}), Potential::geometric(0.25));
  REQUIRE(e.has_value());
  CHECK(*e == doctest::Approx(std::log(2.0) - 0.125 * std::log(12.0)).epsilon(1e-14));
  CHECK_FALSE(exact_expected_pressure(mean_example_family(), BaseProcess::iid({0.5, 0.5}), Potential::geometric(0.25)));
}

TEST_CASE("Bowen roots") {
  const BowenResult r = bowen_dimension(cantor_family(), BaseProcess::iid({0.5, 0.5}));
  CHECK(std::abs(r.h - kH) < 1e-3);
  CHECK(r.exact);
  BowenOptions o;
  o.tol_t = 1e-8;
  CHECK(std::abs(bowen_dimension(cantor_family(), BaseProcess::deterministic(0), o).h - std::log(2.0) / std::log(3.0)) <
        1e-6);
  CHECK(std::abs(bowen_dimension(cantor_family(), BaseProcess::deterministic(1), o).h - 0.5) < 1e-6);
}

TEST_CASE("convexity probe") {
  MonteCarlo mc;
  mc.n_steps = 60;
  mc.n_samples = 60;
  const Potential phi = Potential::branch_constant({{-std::log(2.0), -std::log(2.0)}, {-std::log(2.0), -std::log(2.0)}});
  const ConvexityReport c =
      pressure_convexity_probe(cantor_family(), BaseProcess::iid({0.5, 0.5}), phi, {0.0, 1.0, 2.0}, {0.0, 0.5, 1.0}, mc);
  CHECK(c.violations == 0);
  CHECK(c.min_monotone_margin >= 0.0);

  const ConvexityReport t = pressure_convexity_probe(two_slope_family(2, 4), BaseProcess::deterministic(0),
                                                     Potential::geometric(0.0), {0.0}, {0.0, 0.5, 1.0, 1.5}, mc);
  CHECK(t.violations == 0);
  CHECK(t.min_t_strictness >= 1e-4);

  const ConvexityReport d = pressure_convexity_probe(cantor_family(), BaseProcess::iid({0.5, 0.5}), phi, {1.0}, {0.5}, mc);
  CHECK(d.degenerate);
  CHECK(d.violations == 0);
}
