#include <cmath>

#include "doctest.h"
#include "randpress/error.hpp"
#include "randpress/induce.hpp"

using namespace randpress;

namespace {
const BaseProcess kFair = BaseProcess::iid({0.5, 0.5});
SymbolPath word_path(std::vector<Symbol> w) { return sample_path(BaseProcess::periodic(std::move(w)), 400, 0, 1); }
}  // namespace

TEST_CASE("expanding set for the mean example") {
  const ExpandingSetSpec set = find_expanding_set(mean_example_family(), kFair, 8);
  CHECK(set.mean_log_floor > 0.0);
  CHECK(set.measure > 0.0);
  CHECK(set.certified_measure <= set.measure);
  // Windows starting with the contracting symbol never belong to A.
  for (std::uint64_t code = 0; code < set.table.size(); ++code) {
    if (set.window(code)[0] == 0) CHECK(set.table[code] != WindowStatus::kAccept);
  }
  // 1,0 followed by a return to 1 has product 8 * 0.5 = 4.
  std::vector<Symbol> w{1, 0, 1, 1, 1, 1, 1, 1};
  CHECK(set.table[set.code(w)] == WindowStatus::kAccept);
  CHECK(window_probability(kFair, w) == doctest::Approx(1.0 / 256.0));
  const BlockCheck chk = exhaustive_block_check(set);
  CHECK(chk.ok);
  CHECK(chk.min_log_product > 0.0);
}

TEST_CASE("induced blocks") {
  const FiberFamily fam = mean_example_family();
  const ExpandingSetSpec set = find_expanding_set(fam, kFair, 8);
  const auto a = induced_path(fam, set, word_path({1, 0}), 3);
  REQUIRE(a.size() == 3);
  CHECK(a[0].start == 0);
  CHECK(a[0].tau == 2);
  CHECK(a[0].expansion() == doctest::Approx(4.0));
  const auto b = induced_path(fam, set, word_path({1}), 4);
  for (const auto& blk : b) {
    CHECK(blk.tau == 1);
    CHECK(blk.expansion() == doctest::Approx(8.0));
  }
  const auto r = induced_path(fam, set, sample_path(kFair, 2000, 0, 3), 40);
  for (const auto& blk : r) CHECK(blk.log_expansion > 0.0);
}

TEST_CASE("uniformly expanding families induce trivially") {
  const FiberFamily fam = cantor_family();
  const ExpandingSetSpec set = find_expanding_set(fam, kFair, 4);
  CHECK(set.measure == doctest::Approx(1.0));
  for (const auto& blk : induced_path(fam, set, sample_path(kFair, 200, 0, 1), 20)) CHECK(blk.tau == 1);
  InducedOptions o;
  o.n_steps = 30;
  o.n_samples = 4;
  o.grid_size = 257;
  const InducedConsistency c = induced_pressure_consistency(fam, kFair, set, 0.4, o);
  CHECK(std::abs(c.difference) < 1e-8);
}

TEST_CASE("induced potential is the Birkhoff sum along the block") {
  const FiberFamily fam = mean_example_family();
  const ExpandingSetSpec set = find_expanding_set(fam, kFair, 8);
  const SymbolPath p = word_path({1, 0});
  const InducedBlock blk = induced_path(fam, set, p, 1)[0];
  // A point of the block's cylinder: pull 0.5 back along the block word.
  double z = 0.5;
  for (int j = blk.tau - 1; j >= 0; --j) z = inverse_images(fam, p.at(j), z)[0].point.real();
  const double t = 0.7;
  double expect = 0.0, y = z;
  for (int j = 0; j < blk.tau; ++j) {
    expect += -t * log_abs_derivative(fam, p.at(j), y);
    y = apply_map(fam, p.at(j), y).real();
  }
  CHECK(induced_potential(fam, Potential::geometric(t), p, blk, z) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mean example at t = 0 counts preimages") {
  const FiberFamily fam = mean_example_family();
  const ExpandingSetSpec set = find_expanding_set(fam, kFair, 8);
  InducedOptions o;
  o.n_steps = 40;
  o.n_samples = 6;
  o.grid_size = 257;
  const InducedConsistency c = induced_pressure_consistency(fam, kFair, set, 0.0, o);
  CHECK(c.direct.value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(c.induced.value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("families without mean expansion are refused") {
  const FiberFamily fam = mean_example_family();
  CHECK_THROWS_AS(find_expanding_set(fam, BaseProcess::deterministic(0), 6), Error);
  CHECK_THROWS_AS(find_expanding_set(fam, kFair, 0), Error);
}
