// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "randpress/classify.hpp"
#include "randpress/error.hpp"
#include "randpress/induce.hpp"
#include "randpress/julia.hpp"
#include "randpress/multifractal.hpp"
#include "randpress/pressure.hpp"
#include "randpress/transfer.hpp"

using namespace randpress;

namespace {

const double kH = std::log(4.0) / std::log(12.0);
const BaseProcess kFair = BaseProcess::iid({0.5, 0.5});

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& body, double budget_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o = {false, std::string("error ") + std::string(e.name()) + ": " + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs >= budget_s) {
    o.pass = false;
    o.detail += fmt("; over time budget %.0f s", budget_s);
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

Outcome cantor_bowen() {
  const BowenResult r = bowen_dimension(cantor_family(), kFair);
  const double err = std::abs(r.h - kH);
  return {err <= 1e-3, fmt("h = %.6f, |h - log4/log12| = %.2e", r.h, err)};
}

Outcome deterministic_fibers() {
  BowenOptions o;
  o.tol_t = 1e-9;
  const double h0 = bowen_dimension(cantor_family(), BaseProcess::deterministic(0), o).h;
  const double h1 = bowen_dimension(cantor_family(), BaseProcess::deterministic(1), o).h;
  const double e0 = std::abs(h0 - std::log(2.0) / std::log(3.0));
  const double e1 = std::abs(h1 - 0.5);
  return {e0 <= 1e-6 && e1 <= 1e-6, fmt("h0 = %.8f (err %.1e), h1 = %.8f (err %.1e)", h0, e0, h1, e1)};
}

Outcome expected_pressure_closed_form() {
  MonteCarlo mc;
  mc.n_samples = 200;
  mc.n_steps = 200;
  mc.prefer_exact = false;
  bool ok = true;
  std::string d;
  for (double t : {0.0, 0.25, kH, 1.0}) {
    const ExpectedPressureEstimate e = expected_pressure(cantor_family(), kFair, Potential::geometric(t), mc);
    const double closed = std::log(2.0) - 0.5 * t * std::log(12.0);
    const double dev = std::abs(e.value - closed);
    // Round-off slack only matters at t = 0, where the estimator has no noise.
    const bool pass = dev <= 3.0 * e.std_error + 1e-12;
    ok = ok && pass;
    d += fmt("t=%.3f dev %.1e/3se %.1e; ", t, dev, 3.0 * e.std_error);
  }
  return {ok, d};
}

Outcome variance_classification() {
  ClassifyOptions o;
  o.variance.n_max = 256;
  o.variance.n_samples = 2000;
  const ClassificationVerdict c = classify_system(cantor_family(), kFair, kH, o);
  const ClassificationVerdict d =
      classify_system(cantor_family(), BaseProcess::deterministic(0), std::log(2.0) / std::log(3.0), o);
  const double target = 6.439e-3;
  const double rel = std::abs(c.variance.sigma2 - target) / target;
  const bool ok = rel <= 0.1 && c.verdict == Verdict::kEssential && d.variance.sigma2 <= 1e-8 &&
                  d.verdict == Verdict::kQuasiDeterministic;
  return {ok, fmt("sigma2 = %.4e (rel err %.3f), single map sigma2 = %.1e", c.variance.sigma2, rel,
                  d.variance.sigma2) +
                  ", verdicts " + verdict_name(c.verdict) + " / " + verdict_name(d.verdict)};
}

Outcome gibbs_cylinders() {
  double worst = 0.0, worst_sum = 0.0;
  const SymbolPath p = sample_path(kFair, 32, 0, 21);
  for (double t : {0.0, 0.5, kH, 1.0, 2.0}) {
    for (int n = 1; n <= 10; ++n) {
      const CylinderMasses m = conformal_cylinder_masses(cantor_family(), p, Potential::geometric(t), n);
      double sum = 0.0;
      for (const auto& c : m.cylinders) {
        worst = std::max(worst, std::abs(c.mass - std::ldexp(1.0, -n)));
        sum += c.mass;
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  const CylinderMasses ts = conformal_cylinder_masses(two_slope_family(2, 4), sample_path(BaseProcess::deterministic(0), 4, 0, 1),
                                                      Potential::geometric(1.0), 1);
  const double e2 = std::max(std::abs(ts.cylinders.at(0).mass - 2.0 / 3.0), std::abs(ts.cylinders.at(1).mass - 1.0 / 3.0));
  return {worst <= 1e-10 && worst_sum <= 1e-10 && e2 <= 1e-12,
          fmt("Cantor max |mass - 2^-n| = %.1e, |sum - 1| = %.1e; two-slope err %.1e", worst, worst_sum, e2)};
}

Outcome temperature_function() {
  const double l = -std::log(2.0);
  const Potential cphi = Potential::branch_constant({{l, l}, {l, l}});
  std::vector<double> qs;
  for (int i = -8; i <= 8; ++i) qs.push_back(0.25 * i);
  double e1 = 0.0;
  for (double q : qs) e1 = std::max(e1, std::abs(temperature(cantor_family(), kFair, cphi, q).value - (1.0 - q) * 0.557886));
  const Potential bern = Potential::branch_constant({{std::log(0.3), std::log(0.7)}});
  const TemperatureCurve curve = temperature_curve(doubling_family(), BaseProcess::deterministic(0), bern, qs);
  double e2 = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double closed = std::log(std::pow(0.3, qs[i]) + std::pow(0.7, qs[i])) / std::log(2.0);
    e2 = std::max(e2, std::abs(curve.value[i] - closed));
  }
  const SpectrumResult s = legendre_spectrum(curve);
  const double tang = s.tangency ? std::abs(*s.tangency) : 1.0;
  const double peak = s.peak_gap ? std::abs(*s.peak_gap) : 1.0;
  return {e1 <= 1e-3 && e2 <= 1e-3 && tang <= 2e-3 && peak <= 2e-3,
          fmt("Cantor max err %.1e, Bernoulli max err %.1e, tangency %.1e, peak gap %.1e", e1, e2, tang, peak)};
}

Outcome derivative_cross_check() {
  const Potential bern = Potential::branch_constant({{std::log(0.3), std::log(0.7)}});
  const NormalizedPotential phi(doubling_family(), BaseProcess::deterministic(0), bern, MonteCarlo{});
  bool ok = true;
  std::string d;
  for (double q : {0.0, 1.0, 2.0}) {
    const DerivativeCrossCheck x = temperature_derivative(phi, q);
    ok = ok && x.agree && x.finite_difference.value < 0.0 && x.ratio.value < 0.0;
    d += fmt("q=%.0f fd %.6f ratio %.6f; ", q, x.finite_difference.value, x.ratio.value);
  }
  return {ok, d};
}

Outcome decay_of_correlations() {
  CorrelationOptions o;
  const SymbolPath p = sample_path(kFair, 12 + o.density.nu_depth + 8, o.n_back + 1, 2);
  const int m = o.density.grid_size;
  const FiberFunction id = FiberFunction::sample(m, [](double y) { return y; });
  const FiberFunction one = FiberFunction::constant(m, 1.0);
  const Potential pot = Potential::geometric(kH);
  const std::vector<double> c = correlation_series(cantor_family(), p, pot, id, id, 12, o);
  const std::vector<double> z = correlation_series(cantor_family(), p, pot, id, one, 12, o);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (int n = 2; n <= 12; ++n) {
    const double y = std::log(std::abs(c[static_cast<std::size_t>(n)]));
    sx += n;
    sy += y;
    sxx += n * n;
    sxy += n * y;
    ++k;
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  double zmax = 0.0;
  for (double v : z) zmax = std::max(zmax, std::abs(v));
  return {std::isfinite(slope) && slope <= -0.1 && zmax <= 1e-10,
          fmt("slope %.4f, max |corr| for constant g %.1e", slope, zmax)};
}

Outcome distortion_bound() {
  const std::vector<std::pair<double, double>> probes{{0.0, 1e-3}, {0.1, 0.2}, {0.25, 0.75}, {0.0, 1.0}, {0.49, 0.51}};
  struct Case {
    FiberFamily family;
    BaseProcess process;
  };
  const std::vector<Case> cases{{cantor_family(), kFair},
                                {two_slope_family(2, 4), BaseProcess::deterministic(0)},
                                {two_slope_family(3, 3), BaseProcess::deterministic(0)},
                                {doubling_family(), BaseProcess::deterministic(0)}};
  double worst = -1e300, worst_bc = 0.0;
  int checks = 0;
  for (const auto& c : cases) {
    const int k = c.family.num_symbols();
    std::vector<std::vector<double>> vals;
    for (int a = 0; a < k; ++a) vals.push_back({0.3 * a - 0.2, 0.1 + 0.05 * a});
    const std::vector<Potential> pots{Potential::geometric(0.0), Potential::geometric(0.6), Potential::geometric(1.3),
                                      Potential::branch_constant(vals)};
    for (int s = 0; s < 3; ++s) {
      const SymbolPath p = sample_path(c.process, 16, 0, 40 + s);
      for (std::size_t i = 0; i < pots.size(); ++i) {
        for (int n : {1, 4, 8}) {
          const DistortionReport r = distortion_check(c.family, p, pots[i], n, probes);
          worst = std::max(worst, r.worst_excess);
          if (i == 3) worst_bc = std::max(worst_bc, r.max_log_ratio);
          ++checks;
        }
      }
    }
  }
  return {worst <= 1e-8 && worst_bc <= 1e-12,
          fmt("%.0f checks, worst excess over Q rho^alpha %.1e, branch-constant max log-ratio %.1e", checks, worst,
              worst_bc)};
}

Outcome convexity_monotonicity() {
  MonteCarlo mc;
  mc.n_steps = 100;
  mc.n_samples = 100;
  mc.prefer_exact = false;
  const Potential phi = Potential::branch_constant({{std::log(0.3), std::log(0.7)}, {std::log(0.5), std::log(0.5)}});
  const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
  const ConvexityReport r =
      pressure_convexity_probe(cantor_family(), kFair, phi, {0.0, 0.5, 1.0, 1.5, 2.0}, ts, mc);
  bool strictly = true;
  for (std::size_t i = 0; i + 1 < r.grid.size(); ++i) {
    if (r.grid[i].q == r.grid[i + 1].q && !(r.grid[i + 1].estimate.value < r.grid[i].estimate.value)) strictly = false;
  }
  return {r.violations == 0 && r.min_monotone_margin >= 0.0 && strictly,
          fmt("%.0f midpoint checks, %.0f violations, max excess %.1e, min monotone margin %.2e", r.segments_checked,
              r.violations, r.max_violation, r.min_monotone_margin)};
}

Outcome inducing() {
  const FiberFamily fam = mean_example_family();
  InducedOptions o;
  const ExpandingSetSpec set = find_expanding_set(fam, kFair, 8);
  const BlockCheck chk = exhaustive_block_check(set);
  double min_block = 1e300;
  for (int s = 0; s < 8; ++s) {
    for (const auto& b : induced_path(fam, set, sample_path(kFair, 4000, 0, 500 + s), 200)) {
      min_block = std::min(min_block, b.log_expansion);
    }
  }
  bool agree = true;
  std::string d;
  for (double t : {0.0, 0.3}) {
    const InducedConsistency c = induced_pressure_consistency(fam, kFair, set, t, o);
    agree = agree && c.agree;
    d += fmt("t=%.1f direct %.5f induced %.5f (3 sigma %.1e); ", t, c.direct.value, c.induced.value,
             3.0 * c.combined_error);
  }
  const MeanExampleBowen mb = mean_example_bowen(o);
  const bool ok = chk.ok && chk.min_log_product > 0.0 && min_block > 0.0 && agree && mb.root.h > 0.0 && mb.root.h <= 0.52;
  return {ok, fmt("min block log product %.3f (enumerated) / %.3f (sampled); ", chk.min_log_product, min_block) + d +
                  fmt("h = %.4f", mb.root.h)};
}

Outcome julia_sets() {
  JuliaOptions o;
  o.depth = 18;
  const JuliaBowen c0 = julia_bowen(2, {0.0}, BaseProcess::deterministic(0), o);
  const JuliaBowen r18 = julia_bowen(2, {0.1, -0.1}, kFair, o);
  o.depth = 14;
  const JuliaBowen r14 = julia_bowen(2, {0.1, -0.1}, kFair, o);
  const double gap = std::abs(r14.h - r18.h);
  const bool ok = std::abs(c0.h - 1.0) <= 0.02 && r18.h > 1.0 && r18.h < 2.0 && r14.h > 1.0 && r14.h < 2.0 && gap <= 0.02;
  return {ok, fmt("c=0: h = %.4f; c=+-0.1: h(14) = %.4f, h(18) = %.4f, gap %.4f", c0.h, r14.h, r18.h, gap)};
}

}  // namespace

int main() {
  run(1, "Cantor Bowen dimension", cantor_bowen, 10.0);
  run(2, "deterministic fibers", deterministic_fibers);
  run(3, "expected-pressure closed form", expected_pressure_closed_form, 30.0);
  run(4, "variance and classification", variance_classification);
  run(5, "Gibbs cylinder masses", gibbs_cylinders);
  run(6, "temperature function and spectrum", temperature_function);
  run(7, "derivative cross-check", derivative_cross_check);
  run(8, "decay of correlations", decay_of_correlations);
  run(9, "distortion bound", distortion_bound);
  run(10, "pressure convexity and monotonicity", convexity_monotonicity);
  run(11, "inducing", inducing);
  run(12, "random Julia sets", julia_sets, 300.0);
  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
