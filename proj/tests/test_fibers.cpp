#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "randpress/error.hpp"
#include "randpress/fibers.hpp"

using namespace randpress;

namespace {
bool has_preimage(const PreimageSet& s, FiberPoint z, double ld) {
  return std::any_of(s.begin(), s.end(),
                     [&](const Preimage& p) { return std::abs(p.point - z) < 1e-12 && std::abs(p.log_deriv - ld) < 1e-12; });
}
}  // namespace

TEST_CASE("inverse images") {
  const FiberFamily cantor = cantor_family();
  PreimageSet s = inverse_images(cantor, 0, 0.5);
  CHECK(s.size() == 2);
  CHECK(has_preimage(s, 1.0 / 6.0, std::log(3.0)));
  CHECK(has_preimage(s, 5.0 / 6.0, std::log(3.0)));
  s = inverse_images(cantor, 1, 0.0);
  CHECK(has_preimage(s, 0.0, std::log(4.0)));
  CHECK(has_preimage(s, 0.75, std::log(4.0)));
  const FiberFamily quad = quadratic_family(2, {0.0});
  s = inverse_images(quad, 0, 1.0);
  CHECK(has_preimage(s, 1.0, std::log(2.0)));
  CHECK(has_preimage(s, -1.0, std::log(2.0)));
}

TEST_CASE("forward maps") {
  CHECK(apply_map(cantor_family(), 0, 5.0 / 6.0).real() == doctest::Approx(0.5));
  CHECK(std::abs(apply_map(quadratic_family(2, {0.1}), 0, 1.0) - FiberPoint(1.1)) < 1e-14);
  CHECK(apply_map(two_slope_family(2, 4), 0, 0.25).real() == doctest::Approx(0.5));
}

TEST_CASE("expansion floors and degrees") {
  const FiberFamily cantor = cantor_family();
  CHECK(expansion_floor(cantor, 0) == doctest::Approx(3.0));
  CHECK(expansion_floor(cantor, 1) == doctest::Approx(4.0));
  CHECK(cantor.degree(0) == 2);
  const FiberFamily mean = mean_example_family();
  CHECK(expansion_floor(mean, 0) == doctest::Approx(0.5));
  CHECK(expansion_floor(mean, 1) == doctest::Approx(8.0));
  CHECK(min_expansion_floor(mean) < 1.0);
  CHECK(quadratic_family(3, {0.0}).degree(0) == 3);
}

TEST_CASE("distortion budget plug-in") {
  CHECK(holder_distortion_budget(1.0, 1.0, 3.0) == doctest::Approx(0.5));
  CHECK(holder_distortion_budget(cantor_family()) == doctest::Approx(0.0));
}

TEST_CASE("admissibility of quadratic families") {
  CHECK(quadratic_delta_bound(2) == doctest::Approx(0.25));
  CHECK(check_admissibility(quadratic_family(2, {0.1, -0.1})).ok);
  CHECK_FALSE(check_admissibility(quadratic_family(2, {0.3})).ok);
}

TEST_CASE("invalid families are rejected") {
  CHECK_THROWS_AS(two_slope_family(1.5, 1.5), Error);
  CHECK_THROWS_AS(affine_full_family({{{0.0, 0.6}, {0.5, 1.0}}}), Error);
  CHECK_THROWS_AS(cantor_family().check_symbol(2), Error);
}
