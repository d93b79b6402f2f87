#include <cmath>

#include "doctest.h"
#include "randpress/classify.hpp"

using namespace randpress;

namespace {
const double kH = std::log(4.0) / std::log(12.0);
}

TEST_CASE("asymptotic variance on the Cantor family") {
  VarianceOptions o;
  o.n_max = 64;
  o.n_samples = 1500;
  const VarianceEstimate v = asymptotic_variance(cantor_family(), BaseProcess::iid({0.5, 0.5}), Potential::geometric(kH), o);
  CHECK(std::abs(v.sigma2 - 6.439e-3) <= 0.1 * 6.439e-3);
  const VarianceEstimate d =
      asymptotic_variance(cantor_family(), BaseProcess::deterministic(1), Potential::geometric(0.5), o);
  CHECK(d.sigma2 <= 1e-8);
  const VarianceEstimate p =
      asymptotic_variance(cantor_family(), BaseProcess::periodic({0, 1}), Potential::geometric(kH), o);
  CHECK(p.variance_curve.back() < 0.1 * 6.439e-3);
}

TEST_CASE("classification verdicts") {
  ClassifyOptions o;
  o.variance.n_max = 64;
  o.variance.n_samples = 1000;
  o.excursion_steps = 2000;
  CHECK(classify_system(cantor_family(), BaseProcess::iid({0.5, 0.5}), kH, o).verdict == Verdict::kEssential);
  CHECK(classify_system(cantor_family(), BaseProcess::deterministic(0), std::log(2.0) / std::log(3.0), o).verdict ==
        Verdict::kQuasiDeterministic);
  const FiberFamily twins = affine_full_family({{{0.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0}}, {{0.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0}}});
  CHECK(classify_system(twins, BaseProcess::iid({0.3, 0.7}), std::log(2.0) / std::log(3.0), o).verdict ==
        Verdict::kQuasiDeterministic);
}

TEST_CASE("Gibbs ratio extremes") {
  const SymbolPath alt = sample_path(BaseProcess::periodic({0, 1}), 600, 0, 1);
  const GibbsExtremes a = gibbs_ratio_extremes(cantor_family(), alt, kH, 512);
  for (double v : a.running_min) CHECK(v >= std::exp(-0.0803));
  for (double v : a.running_max) CHECK(v <= std::exp(0.0803));
  const SymbolPath one = sample_path(BaseProcess::deterministic(1), 600, 0, 1);
  const GibbsExtremes b = gibbs_ratio_extremes(cantor_family(), one, 0.5, 512);
  for (double v : b.running_min) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  for (double v : b.running_max) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("LIL-scale excursions across a seed suite") {
  double max_hi = 0.0, min_lo = 1e300;
  for (int s = 0; s < 20; ++s) {
    const SymbolPath p = sample_path(BaseProcess::iid({0.5, 0.5}), 10100, 0, 1000 + s);
    const GibbsExtremes g = gibbs_ratio_extremes(cantor_family(), p, kH, 10000);
    max_hi = std::max(max_hi, g.running_max.back());
    min_lo = std::min(min_lo, g.running_min.back());
  }
  CHECK(max_hi >= 10.0);
  CHECK(min_lo <= 0.1);
}
