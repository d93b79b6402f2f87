#include "randpress/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "randpress/error.hpp"
#include "randpress/parallel.hpp"

namespace randpress {

std::optional<std::vector<double>> symbol_local_log_lambda(const FiberFamily& family, const Potential& potential) {
  if (!family.has_constant_derivatives() || !potential.symbol_local()) return std::nullopt;
  std::vector<double> out;
  for (Symbol a = 0; a < family.num_symbols(); ++a) {
    const auto& bs = family.branches[static_cast<std::size_t>(a)];
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> v;
    for (std::size_t b = 0; b < bs.size(); ++b) {
      v.push_back(potential.value(a, static_cast<int>(b), std::log(std::abs(bs[b].slope)), 0));
      m = std::max(m, v.back());
    }
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    out.push_back(m + std::log(s));
  }
  return out;
}

PressureTrace pressure_trace(const FiberFamily& family, const SymbolPath& path, const Potential& potential, int n,
                             const LambdaOptions& options) {
  if (n < 1) throw Error(ErrorCode::kValidation, "pressure_trace: n must be >= 1");
  PressureTrace tr;
  tr.path = path;
  tr.potential = potential.describe();
  tr.tol = options.tol;
  tr.values.resize(static_cast<std::size_t>(n));
  if (auto local = symbol_local_log_lambda(family, potential)) {
    for (int j = 0; j < n; ++j) tr.values[static_cast<std::size_t>(j)] = (*local)[static_cast<std::size_t>(path.at(j))];
  } else {
    const LambdaTrace lt = lambda_trace(family, path, potential, n, options);
    for (int j = 0; j < n; ++j) tr.values[static_cast<std::size_t>(j)] = std::log(lt.lambda[static_cast<std::size_t>(j)]);
    tr.max_depth = *std::max_element(lt.depth.begin(), lt.depth.end());
    tr.converged = lt.converged;
    tr.error_index = lt.first_failure;
  }
  tr.partial_sums.resize(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    tr.partial_sums[static_cast<std::size_t>(j) + 1] = tr.partial_sums[static_cast<std::size_t>(j)] + tr.values[static_cast<std::size_t>(j)];
  }
  return tr;
}

ExpectedPressureEstimate expected_pressure(const FiberFamily& family, const BaseProcess& process,
                                           const PotentialForPath& potential, const MonteCarlo& mc) {
  if (mc.n_steps < 10) throw Error(ErrorCode::kValidation, "expected_pressure: n_steps must be >= 10");
  if (mc.n_samples < 1) throw Error(ErrorCode::kValidation, "expected_pressure: n_samples must be >= 1");
  process.validate();
  std::vector<double> per_sample(static_cast<std::size_t>(mc.n_samples), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(mc.n_samples), 0);
  std::string descriptor;
  parallel_for(mc.n_samples, mc.workers, [&](std::int64_t s) {
    const SymbolPath path = draw_base_point(process, mc.n_steps, 0, substream_seed(mc.seed, static_cast<std::uint64_t>(s)));
    const Potential phi = potential(path);
    const PressureTrace tr = pressure_trace(family, path, phi, mc.n_steps, mc.lambda);
    per_sample[static_cast<std::size_t>(s)] = tr.sum(mc.n_steps) / mc.n_steps;
    ok[static_cast<std::size_t>(s)] = tr.converged ? 1 : 0;
    if (s == 0) descriptor = phi.describe();
  });
  RunningStats stats;
  ExpectedPressureEstimate est;
  for (std::size_t s = 0; s < per_sample.size(); ++s) {
    if (ok[s]) {
      stats.push(per_sample[s]);
    } else {
      ++est.failures;
    }
  }
  if (stats.count == 0) {
    throw Error(ErrorCode::kConvergence, "expected_pressure: lambda failed to settle on every sample");
  }
  est.value = stats.mean;
  est.std_error = stats.stderr_of_mean();
  est.n_steps = mc.n_steps;
  est.n_samples = static_cast<int>(stats.count);
  est.potential = descriptor;
  return est;
}

ExpectedPressureEstimate expected_pressure(const FiberFamily& family, const BaseProcess& process,
                                           const Potential& potential, const MonteCarlo& mc) {
  return expected_pressure(family, process, [&potential](const SymbolPath&) { return potential; }, mc);
}

std::optional<double> exact_expected_pressure(const FiberFamily& family, const BaseProcess& process,
                                              const Potential& potential) {
  auto local = symbol_local_log_lambda(family, potential);
  if (!local) return std::nullopt;
  const std::vector<double> freq = process.frequencies();
  if (static_cast<int>(freq.size()) > family.num_symbols()) {
    throw Error(ErrorCode::kConfiguration, "process emits symbols the family does not define");
  }
  double ep = 0.0;
  for (std::size_t a = 0; a < freq.size(); ++a) {
    if (freq[a] > 0.0) ep += freq[a] * (*local)[a];
  }
  return ep;
}

ExpectedPressureEstimate estimate_pressure(const FiberFamily& family, const BaseProcess& process,
                                           const Potential& potential, const MonteCarlo& mc) {
  if (mc.prefer_exact) {
    if (auto ep = exact_expected_pressure(family, process, potential)) {
      ExpectedPressureEstimate est;
      est.value = *ep;
      est.exact = true;
      est.potential = potential.describe();
      return est;
    }
  }
  return expected_pressure(family, process, potential, mc);
}

BowenResult bisect_pressure_zero(const std::function<ExpectedPressureEstimate(double)>& pressure, double t_lo,
                                 double t_hi, double tol_t, double bound_hi, bool exact) {
  if (!(tol_t > 0.0)) throw Error(ErrorCode::kValidation, "bisection tolerance must be positive");
  BowenResult r;
  r.exact = exact;
  ExpectedPressureEstimate lo = pressure(t_lo);
  ExpectedPressureEstimate hi = pressure(t_hi);
  r.evaluations = 2;
  if (!(lo.value > 0.0 && hi.value < 0.0)) {
    t_lo = std::min(t_lo, 0.0);
    t_hi = std::max(t_hi, bound_hi);
    lo = pressure(t_lo);
    hi = pressure(t_hi);
    r.evaluations += 2;
    if (!(lo.value > 0.0 && hi.value < 0.0)) {
      throw Error(ErrorCode::kNoZero, "pressure does not change sign on [" + std::to_string(t_lo) + ", " +
                                          std::to_string(t_hi) + "]",
                  {std::to_string(lo.value), std::to_string(hi.value)});
    }
  }
  const double slope = (hi.value - lo.value) / (t_hi - t_lo);
  double target = tol_t;
  for (int it = 0; it < 200 && t_hi - t_lo > target; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    const ExpectedPressureEstimate m = pressure(mid);
    ++r.evaluations;
    if (m.value > 0.0) {
      t_lo = mid;
      lo = m;
    } else {
      t_hi = mid;
      hi = m;
    }
    if (!exact && slope < 0.0) {
      const double noise = 3.0 * m.std_error / std::abs(slope);
      target = std::max(tol_t, noise);
    }
  }
  r.h = 0.5 * (t_lo + t_hi);
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  r.pressure_lo = lo;
  r.pressure_hi = hi;
  r.tolerance = target;
  r.tolerance_limited = target > tol_t;
  return r;
}

BowenResult bowen_dimension(const FiberFamily& family, const BaseProcess& process, const BowenOptions& options) {
  const double dim = family.ambient_dimension();
  const double t_hi = options.t_hi > 0.0 ? options.t_hi : dim;
  const bool exact = options.mc.prefer_exact &&
                     exact_expected_pressure(family, process, Potential::geometric(0.0)).has_value();
  auto ep = [&](double t) { return estimate_pressure(family, process, Potential::geometric(t), options.mc); };
  return bisect_pressure_zero(ep, options.t_lo, t_hi, options.tol_t, 2.0 * dim, exact);
}

ConvexityReport pressure_convexity_probe(const FiberFamily& family, const BaseProcess& process,
                                         const Potential& phi, const std::vector<double>& q_grid,
                                         const std::vector<double>& t_grid, const MonteCarlo& mc) {
  ConvexityReport rep;
  const int nq = static_cast<int>(q_grid.size());
  const int nt = static_cast<int>(t_grid.size());
  for (double q : q_grid) {
    for (double t : t_grid) {
      const Potential p = Potential::multifractal(phi, q, t, PressureShift::zero());
      rep.grid.push_back({q, t, estimate_pressure(family, process, p, mc)});
    }
  }
  if (nq * nt < 3) {
    rep.degenerate = true;
    return rep;
  }
  const auto at = [&](int i, int j) -> const ExpectedPressureEstimate& {
    return rep.grid[static_cast<std::size_t>(i * nt + j)].estimate;
  };
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.min_t_strictness = std::numeric_limits<double>::infinity();
  rep.min_monotone_margin = std::numeric_limits<double>::infinity();
  const auto check = [&](int i0, int j0, int i1, int j1, int i2, int j2) {
    const auto& a = at(i0, j0);
    const auto& m = at(i1, j1);
    const auto& b = at(i2, j2);
    const double sigma = std::sqrt(a.std_error * a.std_error + m.std_error * m.std_error + b.std_error * b.std_error);
    // Round-off slack so exactly affine pressures do not register as violations.
    const double slack = 1e-12 * (1.0 + std::abs(a.value) + std::abs(m.value) + std::abs(b.value));
    const double excess = m.value - 0.5 * (a.value + b.value) - 3.0 * sigma - slack;
    ++rep.segments_checked;
    if (excess > 0.0) ++rep.violations;
    rep.max_violation = std::max(rep.max_violation, excess);
  };
  // Midpoints are only exact on uniform grids; the probe assumes uniform spacing.
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < nt; ++j) {
      if (j + 2 < nt) {
        check(i, j, i, j + 1, i, j + 2);
        const double strict = 0.5 * (at(i, j).value + at(i, j + 2).value) - at(i, j + 1).value;
        rep.min_t_strictness = std::min(rep.min_t_strictness, strict);
        const double h = t_grid[static_cast<std::size_t>(j) + 1] - t_grid[static_cast<std::size_t>(j)];
        rep.max_t_second_difference = std::max(rep.max_t_second_difference, std::abs(2.0 * strict) / (h * h));
      }
      if (i + 2 < nq) check(i, j, i + 1, j, i + 2, j);
      if (i + 2 < nq && j + 2 < nt) {
        check(i, j, i + 1, j + 1, i + 2, j + 2);
        check(i, j + 2, i + 1, j + 1, i + 2, j);
      }
    }
  }
  // Monotone decrease in t at rate >= log gamma*, per unit of |q|-free geometric part.
  const double log_gamma = std::log(min_expansion_floor(family));
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j + 1 < nt; ++j) {
      const auto& a = at(i, j);
      const auto& b = at(i, j + 1);
      const double dt = t_grid[static_cast<std::size_t>(j) + 1] - t_grid[static_cast<std::size_t>(j)];
      const double sigma = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
      rep.min_monotone_margin = std::min(rep.min_monotone_margin, a.value - b.value - dt * log_gamma + 6.0 * sigma);
    }
  }
  if (!std::isfinite(rep.max_violation)) rep.max_violation = 0.0;
  if (!std::isfinite(rep.min_t_strictness)) rep.min_t_strictness = 0.0;
  if (!std::isfinite(rep.min_monotone_margin)) rep.min_monotone_margin = 0.0;
  return rep;
}

}  // namespace randpress
