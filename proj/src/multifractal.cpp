#include "randpress/multifractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "randpress/error.hpp"
#include "randpress/parallel.hpp"
#include "randpress/transfer.hpp"

namespace randpress {

namespace {

int lookahead(const FiberFamily& family, const MonteCarlo& mc) {
  if (mc.lambda.max_depth > 0) return mc.lambda.max_depth;
  const int d = std::max(2, family.max_degree());
  return std::max(1, static_cast<int>(std::floor(20.0 * std::log(2.0) / std::log(static_cast<double>(d)))));
}

}  // namespace

NormalizedPotential::NormalizedPotential(const FiberFamily& family, const BaseProcess& process, Potential phi,
                                         const MonteCarlo& mc)
    : family_(family), process_(process), phi_(std::move(phi)), mc_(mc) {
  local_ = symbol_local_log_lambda(family_, phi_);
  if (local_) {
    base_pressure_ = estimate_pressure(family_, process_, phi_, mc_);
  } else {
    base_pressure_ = expected_pressure(family_, process_, phi_, mc_);
  }
}

Potential NormalizedPotential::symbol_local_at(double q, double t) const {
  if (!local_) throw Error(ErrorCode::kInternal, "potential pressure is not symbol-local");
  return Potential::multifractal(phi_, q, t, PressureShift::symbols(*local_));
}

Potential NormalizedPotential::at(double q, double t, const SymbolPath* path, int n_steps) const {
  if (local_) return symbol_local_at(q, t);
  if (path == nullptr) throw Error(ErrorCode::kInternal, "per-step pressure needs a path");
  const int n = n_steps + lookahead(family_, mc_) + 1;
  const PressureTrace tr = pressure_trace(family_, *path, phi_, n, mc_.lambda);
  auto values = std::make_shared<const std::vector<double>>(tr.values);
  const std::int64_t offset = path->offset();
  PressureShift shift;
  shift.per_step = [values, offset](std::int64_t index, Symbol) {
    const std::int64_t i = index - offset;
    if (i < 0 || i >= static_cast<std::int64_t>(values->size())) {
      throw Error(ErrorCode::kDomain, "fiber pressure requested outside the resolved trace");
    }
    return (*values)[static_cast<std::size_t>(i)];
  };
  return Potential::multifractal(phi_, q, t, std::move(shift));
}

ExpectedPressureEstimate NormalizedPotential::pressure(double q, double t) const {
  if (local_) return estimate_pressure(family_, process_, symbol_local_at(q, t), mc_);
  const int n = mc_.n_steps;
  return expected_pressure(
      family_, process_, [&](const SymbolPath& path) { return at(q, t, &path, n); }, mc_);
}

TemperatureValue temperature(const NormalizedPotential& phi, double q, const TemperatureOptions& options) {
  const ExpectedPressureEstimate& base = phi.base_pressure();
  const double allowed = base.exact ? 1e-9 : 3.0 * base.std_error + 1e-12;
  if (std::abs(base.value) > allowed) {
    throw Error(ErrorCode::kNormalization,
                "base potential is not normalized: E P(phi) = " + std::to_string(base.value));
  }
  const bool exact = base.exact;
  auto f = [&](double t) { return phi.pressure(q, t); };
  double lo = options.t_lo;
  double hi = options.t_hi;
  for (int k = 0; k < 12 && !(f(lo).value > 0.0); ++k) lo -= (hi - lo);
  for (int k = 0; k < 12 && !(f(hi).value < 0.0); ++k) hi += (hi - lo);
  const double tol = exact ? options.tol : options.mc_tol;
  const BowenResult r = bisect_pressure_zero(f, lo, hi, tol, hi, exact);
  TemperatureValue v;
  v.q = q;
  v.value = r.h;
  v.t_lo = r.t_lo;
  v.t_hi = r.t_hi;
  v.tolerance = r.tolerance;
  v.exact = exact;
  return v;
}

TemperatureValue temperature(const FiberFamily& family, const BaseProcess& process, const Potential& phi, double q,
                             const TemperatureOptions& options) {
  return temperature(NormalizedPotential(family, process, phi, options.mc), q, options);
}

DerivativeEstimate temperature_derivative_fd(const NormalizedPotential& phi, double q,
                                             const TemperatureOptions& options) {
  const double d = options.fd_step;
  const TemperatureValue p1 = temperature(phi, q + d, options);
  const TemperatureValue m1 = temperature(phi, q - d, options);
  const TemperatureValue p2 = temperature(phi, q + 2 * d, options);
  const TemperatureValue m2 = temperature(phi, q - 2 * d, options);
  const double fd1 = (p1.value - m1.value) / (2 * d);
  const double fd2 = (p2.value - m2.value) / (4 * d);
  DerivativeEstimate e;
  e.method = DerivativeMethod::kFiniteDifference;
  e.value = fd1;
  e.error = std::abs(fd1 - fd2) / 3.0 + std::max(p1.tolerance, m1.tolerance) / d;
  return e;
}

DerivativeEstimate temperature_derivative_ratio(const NormalizedPotential& phi, double q,
                                                const TemperatureOptions& options, const RatioOptions& ratio) {
  const FiberFamily& family = phi.family();
  if (!family.is_interval()) {
    throw Error(ErrorCode::kUnsupportedRepresentation, "ratio method needs interval cylinders");
  }
  const double tq = temperature(phi, q, options).value;
  int depth = ratio.depth;
  while (depth > 1 && std::pow(static_cast<double>(family.max_degree()), depth) > static_cast<double>(1 << 22)) --depth;
  std::vector<double> num(static_cast<std::size_t>(ratio.n_samples));
  std::vector<double> den(static_cast<std::size_t>(ratio.n_samples));
  parallel_for(ratio.n_samples, phi.monte_carlo().workers, [&](std::int64_t s) {
    const SymbolPath path =
        draw_base_point(phi.process(), depth, 0, substream_seed(ratio.seed, static_cast<std::uint64_t>(s)));
    const Potential gibbs = phi.at(q, tq, &path, depth);
    const Potential centered = phi.at(1.0, 0.0, &path, depth);  // phi - P_x(phi)
    const CylinderMasses masses = conformal_cylinder_masses(family, path, gibbs, depth);
    double a = 0.0;
    double b = 0.0;
    for (const CylinderMass& c : masses.cylinders) {
      // Birkhoff sums along the pulled-back midpoint orbit of the cylinder.
      double z = 0.5;
      double sa = 0.0;
      double sb = 0.0;
      for (int j = depth - 1; j >= 0; --j) {
        const Symbol sym = path.at(j);
        const int br = c.word[static_cast<std::size_t>(j)];
        const Branch& branch = family.branches[static_cast<std::size_t>(sym)][static_cast<std::size_t>(br)];
        z = std::clamp(branch.preimage(z), branch.lo, branch.hi);
        const double ld = std::log(std::abs(branch.deriv(z)));
        sa += centered.value(sym, br, ld, path.offset() + j);
        sb += ld;
      }
      a += c.mass * sa / depth;
      b += c.mass * sb / depth;
    }
    num[static_cast<std::size_t>(s)] = a;
    den[static_cast<std::size_t>(s)] = b;
  });
  RunningStats sa, sb;
  for (double v : num) sa.push(v);
  for (double v : den) sb.push(v);
  if (!(sb.mean > 0.0)) {
    throw Error(ErrorCode::kInternal, "ratio method: non-positive Lyapunov integral");
  }
  const double r = sa.mean / sb.mean;
  double cov = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) cov += (num[i] - sa.mean) * (den[i] - sb.mean);
  cov = num.size() > 1 ? cov / static_cast<double>(num.size() - 1) : 0.0;
  const double var_r =
      std::max(0.0, sa.variance() - 2.0 * r * cov + r * r * sb.variance()) / (sb.mean * sb.mean * static_cast<double>(num.size()));
  DerivativeEstimate e;
  e.method = DerivativeMethod::kGibbsRatio;
  e.value = r;
  e.error = std::sqrt(var_r);
  return e;
}

DerivativeCrossCheck temperature_derivative(const NormalizedPotential& phi, double q,
                                            const TemperatureOptions& options, const RatioOptions& ratio) {
  DerivativeCrossCheck c;
  c.finite_difference = temperature_derivative_fd(phi, q, options);
  c.ratio = temperature_derivative_ratio(phi, q, options, ratio);
  const double combined = std::hypot(c.finite_difference.error, c.ratio.error) + 1e-12;
  const double diff = std::abs(c.finite_difference.value - c.ratio.value);
  c.agree = diff <= 3.0 * combined;
  c.flagged = diff > 5.0 * combined;
  return c;
}

TemperatureCurve temperature_curve(const FiberFamily& family, const BaseProcess& process, const Potential& phi,
                                   const std::vector<double>& q_grid, const TemperatureOptions& options) {
  const NormalizedPotential np(family, process, phi, options.mc);
  TemperatureCurve c;
  c.base = phi.describe();
  for (double q : q_grid) {
    const TemperatureValue v = temperature(np, q, options);
    const DerivativeEstimate d = temperature_derivative_fd(np, q, options);
    c.q.push_back(q);
    c.value.push_back(v.value);
    c.derivative.push_back(d.value);
    c.derivative_error.push_back(d.error);
    c.roots.push_back(v);
    c.tolerance = std::max(c.tolerance, v.tolerance);
    c.exact = v.exact;
  }
  return c;
}

SpectrumResult legendre_spectrum(const TemperatureCurve& curve) {
  const std::size_t n = curve.q.size();
  SpectrumResult s;
  const double t_tol = 3.0 * std::max(curve.tolerance, 1e-12);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double qa = curve.q[i - 1], qm = curve.q[i], qb = curve.q[i + 1];
    const double w = (qb - qm) / (qb - qa);
    const double chord = w * curve.value[i - 1] + (1.0 - w) * curve.value[i + 1];
    const double excess = curve.value[i] - chord;
    s.max_convexity_excess = std::max(s.max_convexity_excess, excess);
    if (excess > t_tol) s.convex = false;
  }
  if (!s.convex) {
    throw Error(ErrorCode::kNonConvex, "temperature curve fails the midpoint convexity test; refine tolerances");
  }
  double max_err = 0.0;
  double max_q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_err = std::max(max_err, curve.derivative_error[i]);
    max_q = std::max(max_q, std::abs(curve.q[i]));
  }
  const double alpha_tol = 3.0 * max_err + 1e-9;
  double g_tol = 3.0 * (max_err * max_q + curve.tolerance) + 1e-9;

  std::optional<double> t0;
  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = -curve.derivative[i];
    const double g = curve.q[i] * alpha + curve.value[i];
    if (std::abs(curve.q[i]) < 1e-12) t0 = curve.value[i];
    if (std::abs(curve.q[i] - 1.0) < 1e-12) s.tangency = g - alpha;
    if (!(alpha > 0.0)) s.alpha_positive = false;
    bool duplicate = false;
    for (const SpectrumPoint& p : s.points) {
      if (std::abs(p.alpha - alpha) <= alpha_tol && std::abs(p.g - g) <= g_tol) duplicate = true;
    }
    if (!duplicate) s.points.push_back({curve.q[i], alpha, g});
  }
  double g_max = -std::numeric_limits<double>::infinity();
  for (const SpectrumPoint& p : s.points) g_max = std::max(g_max, p.g);
  if (t0) {
    s.peak_gap = g_max - *t0;
    for (const SpectrumPoint& p : s.points) {
      if (p.g < -g_tol || p.g > std::max(*t0, p.alpha) + g_tol) s.bounds_ok = false;
    }
  }
  // Concavity of g in alpha, checked on the alpha-sorted points.
  std::vector<SpectrumPoint> sorted = s.points;
  std::sort(sorted.begin(), sorted.end(), [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.alpha < b.alpha; });
  for (std::size_t i = 1; i + 1 < sorted.size(); ++i) {
    const double aa = sorted[i - 1].alpha, am = sorted[i].alpha, ab = sorted[i + 1].alpha;
    if (ab - aa <= 0.0) continue;
    const double w = (ab - am) / (ab - aa);
    const double chord = w * sorted[i - 1].g + (1.0 - w) * sorted[i + 1].g;
    const double excess = chord - sorted[i].g;
    s.max_concavity_excess = std::max(s.max_concavity_excess, excess);
    if (excess > g_tol) s.concave = false;
  }
  return s;
}

}  // namespace randpress
