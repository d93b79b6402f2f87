#include <cmath>
#include <vector>

#include "doctest.h"
#include "randpress/transfer.hpp"

using namespace randpress;

namespace {
const double kH = std::log(4.0) / std::log(12.0);

double spread(const FiberFunction& f) {
  double lo = 1e300, hi = -1e300;
  for (double v : f.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

SymbolPath word_path(std::vector<Symbol> w, int n) { return sample_path(BaseProcess::periodic(std::move(w)), n, 4, 1); }
}  // namespace

TEST_CASE("one transfer step on constant functions") {
  const FiberFunction one = FiberFunction::constant(257, 1.0);
  for (double t : {0.0, 0.4, 1.0}) {
    const FiberFunction g = apply_transfer(cantor_family(), 0, Potential::geometric(t), one);
    CHECK(g(0.3) == doctest::Approx(2.0 * std::pow(3.0, -t)).epsilon(1e-12));
    CHECK(spread(g) < 1e-12);
  }
  const FiberFunction g = apply_transfer(two_slope_family(2, 4), 0, Potential::geometric(1.0), one);
  CHECK(g(0.7) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("iterated transfer") {
  const FiberFunction one = FiberFunction::constant(257, 1.0);
  const FiberFunction g = iterate_transfer(cantor_family(), word_path({0, 1}, 8), Potential::geometric(kH), one, 2);
  CHECK(std::abs(g(0.5) - 1.0) < 1e-12);
  const FiberFunction d = iterate_transfer(cantor_family(), word_path({0}, 16), Potential::geometric(0.0), one, 10);
  CHECK(d(0.2) == doctest::Approx(1024.0).epsilon(1e-12));
  const FiberFunction a = iterate_transfer(cantor_family(), word_path({1}, 4), Potential::geometric(0.3), one, 1);
  const FiberFunction b = apply_transfer(cantor_family(), 1, Potential::geometric(0.3), one);
  CHECK(a(0.6) == doctest::Approx(b(0.6)).epsilon(1e-14));
}

TEST_CASE("positivity and linearity") {
  const FiberFamily fam = mean_example_family();
  const Potential pot = Potential::geometric(0.5);
  const FiberFunction g1 = FiberFunction::sample(513, [](double y) { return y * y; });
  const FiberFunction g2 = FiberFunction::sample(513, [](double y) { return 1.0 + std::sin(6 * y); });
  const FiberFunction comb = g1.pointwise(g2, [](double a, double b) { return 2.0 * a + 0.5 * b; });
  const FiberFunction l1 = apply_transfer(fam, 0, pot, g1);
  const FiberFunction l2 = apply_transfer(fam, 0, pot, g2);
  const FiberFunction lc = apply_transfer(fam, 0, pot, comb);
  for (double y : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    CHECK(l1(y) >= 0.0);
    CHECK(l2(y) >= 0.0);
    CHECK(std::abs(lc(y) - (2.0 * l1(y) + 0.5 * l2(y))) <= 1e-10 * (1.0 + std::abs(lc(y))));
  }
}

TEST_CASE("lambda on the Cantor fibers") {
  const LambdaTrace a = lambda_trace(cantor_family(), word_path({0}, 64), Potential::geometric(kH), 4);
  for (double l : a.lambda) CHECK(std::log(l) == doctest::Approx(0.0802426).epsilon(1e-5));
  const LambdaTrace b = lambda_trace(cantor_family(), word_path({1}, 64), Potential::geometric(kH), 4);
  for (double l : b.lambda) CHECK(std::log(l) == doctest::Approx(-(std::log(2.0) - kH * std::log(3.0))).epsilon(1e-9));
  const LambdaTrace z = lambda_trace(mean_example_family(), word_path({0, 1, 1}, 64),
                                     Potential::branch_constant({{0.0, 0.0}, {0.0, 0.0}}), 3);
  for (double l : z.lambda) CHECK(l == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("invariant density") {
  DensityOptions o;
  o.grid_size = 257;
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 64, 16, 5);
  const FiberFunction q = invariant_density(cantor_family(), p, Potential::branch_constant({{0.1, -0.2}, {0.3, 0.0}}), 8, o);
  for (double v : q.values()) CHECK(std::abs(v * std::exp(q.log_scale()) - 1.0) < 1e-10);

  // Deterministic two-slope map at t = 0.5 against plain power iteration.
  const FiberFamily ts = two_slope_family(2, 4);
  const Potential pot = Potential::geometric(0.5);
  const SymbolPath d = sample_path(BaseProcess::deterministic(0), 128, 64, 1);
  const FiberFunction qd = invariant_density(ts, d, pot, 40, o);
  FiberFunction g = FiberFunction::constant(257, 1.0);
  for (int k = 0; k < 200; ++k) {
    g = apply_transfer(ts, 0, pot, g);
    g.renormalize();
  }
  const double nq = qd(0.0), ng = g.interpolate(0.0);
  for (double y : {0.1, 0.4, 0.8, 1.0}) CHECK(qd(y) / nq == doctest::Approx(g.interpolate(y) / ng).epsilon(1e-6));
}

TEST_CASE("conformal cylinder masses") {
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 16, 0, 2);
  const CylinderMasses c = conformal_cylinder_masses(cantor_family(), p, Potential::geometric(kH), 3);
  REQUIRE(c.cylinders.size() == 8);
  for (const auto& cyl : c.cylinders) CHECK(cyl.mass == doctest::Approx(0.125).epsilon(1e-12));
  const SymbolPath d = sample_path(BaseProcess::deterministic(0), 4, 0, 1);
  const CylinderMasses t = conformal_cylinder_masses(two_slope_family(2, 4), d, Potential::geometric(1.0), 1);
  REQUIRE(t.cylinders.size() == 2);
  CHECK(t.cylinders[0].mass == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(t.cylinders[1].mass == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const CylinderMasses z = conformal_cylinder_masses(mean_example_family(), shift(p, 1), Potential::geometric(0.0), 1);
  for (const auto& cyl : z.cylinders) CHECK(cyl.mass == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("distortion") {
  const std::vector<std::pair<double, double>> probes{{0.1, 0.2}, {0.0, 1.0}, {0.45, 0.55}};
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 32, 0, 4);
  const DistortionReport r = distortion_check(cantor_family(), p, Potential::branch_constant({{0.0, 1.0}, {0.5, 0.5}}), 6, probes);
  CHECK(r.max_log_ratio < 1e-12);
  CHECK(r.max_budget == doctest::Approx(0.0));
  CHECK_FALSE(r.violation);
  const DistortionReport z = distortion_check(cantor_family(), p, Potential::geometric(0.7), 0, probes);
  CHECK(z.max_log_ratio == doctest::Approx(0.0));
  const DistortionReport m = distortion_check(mean_example_family(), p, Potential::geometric(0.5), 6, probes);
  CHECK_FALSE(m.violation);
  CHECK(m.worst_excess <= 1e-8);
}

TEST_CASE("decay of correlations") {
  CorrelationOptions o;
  o.density.grid_size = 513;
  o.n_back = 16;
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 80, 20, 9);
  const FiberFunction id = FiberFunction::sample(513, [](double y) { return y; });
  const FiberFunction one = FiberFunction::constant(513, 1.0);
  const Potential pot = Potential::geometric(kH);
  const std::vector<double> flat = correlation_series(cantor_family(), p, pot, id, one, 8, o);
  for (double c : flat) CHECK(std::abs(c) < 1e-10);
  const std::vector<double> c = correlation_series(cantor_family(), p, pot, id, id, 8, o);
  CHECK(c[0] > 0.0);
  CHECK(std::abs(c[8]) < 1e-3 * c[0]);
}
