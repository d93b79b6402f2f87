#include <memory>
#include <vector>

#include "doctest.h"
#include "randpress/base.hpp"
#include "randpress/error.hpp"

using namespace randpress;

TEST_CASE("constant and periodic processes") {
  const SymbolPath p = sample_path(BaseProcess::deterministic(0), 4, 0, 1);
  CHECK(p.forward() == std::vector<Symbol>{0, 0, 0, 0});
  const SymbolPath q = sample_path(BaseProcess::periodic({0, 1}), 5, 0, 1);
  CHECK(q.forward() == std::vector<Symbol>{0, 1, 0, 1, 0});
}

TEST_CASE("iid frequencies follow the law of large numbers") {
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 100000, 0, 7);
  int zeros = 0;
  for (Symbol s : p.forward()) zeros += s == 0;
  CHECK(zeros / 1e5 >= 0.49);
  CHECK(zeros / 1e5 <= 0.51);
}

TEST_CASE("paths are deterministic and extend lazily") {
  const BaseProcess proc = BaseProcess::iid({0.3, 0.7});
  const SymbolPath a = sample_path(proc, 50, 20, 99);
  const SymbolPath b = sample_path(proc, 50, 20, 99);
  CHECK(a.forward() == b.forward());
  CHECK(a.backward() == b.backward());
  const SymbolPath longer = a.extended(500, 200);
  for (int i = -20; i < 50; ++i) CHECK(longer.at(i) == a.at(i));
  const SymbolPath other = sample_path(proc, 50, 0, 100);
  CHECK(other.forward() != a.forward());
}

TEST_CASE("shift") {
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 40, 10, 3);
  const SymbolPath s0 = shift(p, 0);
  for (int i = -10; i < 40; ++i) CHECK(s0.at(i) == p.at(i));
  const SymbolPath back = shift(shift(p, 3), -3);
  for (int i = -10; i < 40; ++i) CHECK(back.at(i) == p.at(i));
  const SymbolPath w = shift(sample_path(BaseProcess::periodic({0, 1}), 10, 0, 1), 1);
  CHECK(w.at(0) == 1);
  CHECK(w.at(1) == 0);
  CHECK(w.at(2) == 1);
}

TEST_CASE("birkhoff statistics") {
  const std::vector<double> ones{1, 1, 1};
  RunningStats s = birkhoff_stats(ones);
  CHECK(s.mean == doctest::Approx(1.0));
  CHECK(s.variance() == doctest::Approx(0.0));
  const std::vector<double> two{0, 2};
  s = birkhoff_stats(two);
  CHECK(s.mean == doctest::Approx(1.0));
  CHECK(s.variance() == doctest::Approx(2.0));

  const double a = 0.080243;
  const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 10000, 0, 11);
  std::vector<double> xs;
  for (Symbol sym : p.forward()) xs.push_back(sym == 0 ? a : -a);
  s = birkhoff_stats(xs);
  CHECK(std::abs(s.variance() - a * a) <= 0.1 * a * a);
}

TEST_CASE("process validation") {
  CHECK_THROWS_AS(BaseProcess::iid({0.5, 0.6}).validate(), Error);
  CHECK_THROWS_AS(BaseProcess::iid({-0.1, 1.1}).validate(), Error);
  CHECK_THROWS_AS(BaseProcess::periodic({}).validate(), Error);
  CHECK(BaseProcess::periodic({0, 1, 1}).frequencies()[1] == doctest::Approx(2.0 / 3.0));
}
