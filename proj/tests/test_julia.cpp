#include <cmath>

#include "doctest.h"
#include "randpress/error.hpp"
#include "randpress/julia.hpp"

using namespace randpress;

TEST_CASE("inverse trees land on the anchor") {
  const FiberFamily fam = quadratic_family(2, {0.1, -0.1});
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 20, 0, 3);
  const InverseTree tree = build_inverse_tree(fam, p, 10, true);
  CHECK(tree.leaves.size() == 1024);
  const TreeCheck chk = verify_inverse_tree(fam, tree);
  CHECK(chk.ok);
  CHECK(chk.max_relative_error < 1e-8);
}

TEST_CASE("circle case") {
  JuliaOptions o;
  o.depth = 16;
  o.samples = 2;
  const BaseProcess one = BaseProcess::deterministic(0);
  CHECK(std::abs(julia_pressure(2, {0.0}, one, 1.0, o).value) < 2e-2);
  const ExpectedPressureEstimate e0 = julia_pressure(2, {0.0}, one, 0.0, o);
  CHECK(e0.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  o.depth = 14;
  CHECK(std::abs(julia_bowen(2, {0.0}, one, o).h - 1.0) < 0.02);
}

TEST_CASE("random quadratic family has dimension above one") {
  JuliaOptions o;
  o.depth = 12;
  o.samples = 8;
  const BaseProcess fair = BaseProcess::iid({0.5, 0.5});
  CHECK(julia_pressure(2, {0.1, -0.1}, fair, 1.0, o).value > 0.0);
  const JuliaBowen b = julia_bowen(2, {0.1, -0.1}, fair, o);
  CHECK(b.h > 1.0);
  CHECK(b.h < 2.0);
}

TEST_CASE("inadmissible parameters are refused") {
  const BaseProcess one = BaseProcess::deterministic(0);
  CHECK_THROWS_AS(julia_pressure(2, {0.3}, one, 1.0), Error);
  JuliaOptions o;
  o.depth = 23;
  CHECK_THROWS_AS(julia_pressure(2, {0.1}, one, 1.0, o), Error);
  CHECK_THROWS_AS(build_inverse_tree(cantor_family(), sample_path(one, 4, 0, 1), 3), Error);
}
