#include "randpress/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "randpress/error.hpp"

namespace randpress {

// ---------------------------------------------------------------------------
// FiberFunction

FiberFunction FiberFunction::constant(int grid_size, double value) {
  if (grid_size < 2) throw Error(ErrorCode::kValidation, "grid needs at least 2 points");
  if (!(value >= 0.0)) throw Error(ErrorCode::kValidation, "fiber functions are non-negative");
  FiberFunction f;
  f.values_.assign(static_cast<std::size_t>(grid_size), value);
  return f;
}

FiberFunction FiberFunction::sample(int grid_size, const std::function<double(double)>& fn) {
  FiberFunction f = constant(grid_size, 0.0);
  for (int i = 0; i < grid_size; ++i) {
    const double v = fn(f.node(i));
    if (!(v >= 0.0)) throw Error(ErrorCode::kValidation, "fiber functions are non-negative");
    f.values_[static_cast<std::size_t>(i)] = v;
  }
  return f;
}

FiberFunction FiberFunction::anchors(std::vector<FiberPoint> points, std::vector<double> values) {
  if (points.size() != values.size()) throw Error(ErrorCode::kValidation, "anchor/value size mismatch");
  FiberFunction f;
  f.support_ = Support::kTreeAnchors;
  f.anchors_ = std::move(points);
  f.values_ = std::move(values);
  return f;
}

double FiberFunction::interpolate(double y) const {
  const int m = size();
  const double pos = std::clamp(y, 0.0, 1.0) * (m - 1);
  const int i = std::min(static_cast<int>(pos), m - 2);
  const double frac = pos - i;
  return values_[static_cast<std::size_t>(i)] * (1.0 - frac) + values_[static_cast<std::size_t>(i + 1)] * frac;
}

double FiberFunction::operator()(double y) const { return interpolate(y) * std::exp(log_scale_); }

double FiberFunction::max_value() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

void FiberFunction::renormalize() {
  const double m = max_value();
  if (!(m > 0.0) || !std::isfinite(m)) return;
  for (double& v : values_) v /= m;
  log_scale_ += std::log(m);
}

FiberFunction FiberFunction::pointwise(const FiberFunction& other,
                                       const std::function<double(double, double)>& op) const {
  if (support_ != Support::kUniformGrid || other.support_ != Support::kUniformGrid || size() != other.size()) {
    throw Error(ErrorCode::kUnsupportedRepresentation, "pointwise op needs matching grids");
  }
  FiberFunction r = *this;
  const double sa = std::exp(log_scale_);
  const double sb = std::exp(other.log_scale_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = op(values_[i] * sa, other.values_[i] * sb);
  r.log_scale_ = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Grid operator

namespace {

struct GridPreimage {
  int cell;       // interpolation cell of the preimage
  double frac;
  int branch;
  double log_deriv;
};

/// Preimage tables for each symbol on an M-point grid.
class GridKernel {
 public:
  GridKernel(const FiberFamily& family, int grid_size) : family_(family), m_(grid_size) {
    if (!family.is_interval()) {
      throw Error(ErrorCode::kUnsupportedRepresentation, "grid transfer needs an interval family");
    }
    tables_.resize(static_cast<std::size_t>(family.num_symbols()));
  }

  const std::vector<GridPreimage>& table(Symbol symbol) {
    auto& t = tables_[static_cast<std::size_t>(symbol)];
    if (!t.empty()) return t;
    const auto& bs = family_.branches[static_cast<std::size_t>(symbol)];
    t.reserve(static_cast<std::size_t>(m_) * bs.size());
    for (int i = 0; i < m_; ++i) {
      const double w = static_cast<double>(i) / (m_ - 1);
      for (std::size_t b = 0; b < bs.size(); ++b) {
        const double z = std::clamp(bs[b].preimage(w), bs[b].lo, bs[b].hi);
        const double pos = z * (m_ - 1);
        const int cell = std::min(static_cast<int>(pos), m_ - 2);
        t.push_back({cell, pos - cell, static_cast<int>(b), std::log(std::abs(bs[b].deriv(z)))});
      }
    }
    return t;
  }

  int degree(Symbol symbol) const { return static_cast<int>(family_.branches[static_cast<std::size_t>(symbol)].size()); }

  /// out = L_symbol g (values only; log scale untouched).
  void apply(Symbol symbol, const Potential& potential, std::int64_t index, const std::vector<double>& g,
             std::vector<double>& out) {
    const auto& t = table(symbol);
    const int deg = degree(symbol);
    out.assign(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (int b = 0; b < deg; ++b) {
        const GridPreimage& p = t[static_cast<std::size_t>(i * deg + b)];
        const double gz = g[static_cast<std::size_t>(p.cell)] * (1.0 - p.frac) +
                          g[static_cast<std::size_t>(p.cell + 1)] * p.frac;
        acc += gz * std::exp(potential.value(symbol, p.branch, p.log_deriv, index));
      }
      out[static_cast<std::size_t>(i)] = acc;
    }
  }

 private:
  const FiberFamily& family_;
  int m_;
  std::vector<std::vector<GridPreimage>> tables_;
};

void require_grid(const FiberFunction& g) {
  if (g.support() != FiberFunction::Support::kUniformGrid) {
    throw Error(ErrorCode::kUnsupportedRepresentation,
                "transfer on grid functions only; tree anchors go through the tree-sum routines");
  }
}

void keep_in_range(FiberFunction& f) {
  const double m = f.max_value();
  if (m > 1e300 || (m > 0.0 && m < 1e-300)) f.renormalize();
}

/// Pushes g forward `steps` fibers starting at path index `start`,
/// renormalizing every step into the log scale.
FiberFunction push_forward(GridKernel& kernel, const SymbolPath& path, const Potential& potential,
                           FiberFunction g, std::int64_t start, int steps) {
  std::vector<double> next;
  for (int s = 0; s < steps; ++s) {
    const std::int64_t i = start + s;
    kernel.apply(path.at(i), potential, path.offset() + i, g.values(), next);
    g.mutable_values().swap(next);
    g.renormalize();
  }
  return g;
}

double scaled_sum(const FiberFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s;
}

/// Streaming log-sum-exp accumulator.
struct LogSum {
  double m = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  void add(double v) {
    if (v <= m) {
      s += std::exp(v - m);
    } else {
      s = s * std::exp(m - v) + 1.0;
      m = v;
    }
  }
  double value() const { return m + std::log(s); }
};

void tree_recurse(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                  std::int64_t start, int level, FiberPoint w, double acc, LogSum& sum) {
  if (level == 0) {
    sum.add(acc);
    return;
  }
  const std::int64_t i = start + level - 1;
  const Symbol a = path.at(i);
  const std::int64_t index = path.offset() + i;
  if (family.is_interval()) {
    const double target = std::clamp(w.real(), 0.0, 1.0);
    const auto& bs = family.branches[static_cast<std::size_t>(a)];
    for (std::size_t b = 0; b < bs.size(); ++b) {
      const double z = std::clamp(bs[b].preimage(target), bs[b].lo, bs[b].hi);
      const double ld = std::log(std::abs(bs[b].deriv(z)));
      tree_recurse(family, path, potential, start, level - 1, {z, 0.0},
                   acc + potential.value(a, static_cast<int>(b), ld, index), sum);
    }
  } else {
    for (const Preimage& p : inverse_images(family, a, w)) {
      tree_recurse(family, path, potential, start, level - 1, p.point,
                   acc + potential.value(a, p.branch, p.log_deriv, index), sum);
    }
  }
}

int default_max_depth(const FiberFamily& family) {
  const int d = std::max(2, family.max_degree());
  return std::max(1, static_cast<int>(std::floor(20.0 * std::log(2.0) / std::log(static_cast<double>(d)))));
}

}  // namespace

FiberFunction apply_transfer(const FiberFamily& family, Symbol symbol, const Potential& potential,
                             const FiberFunction& g, std::int64_t index) {
  require_grid(g);
  family.check_symbol(symbol);
  GridKernel kernel(family, g.size());
  FiberFunction out = g;
  kernel.apply(symbol, potential, index, g.values(), out.mutable_values());
  keep_in_range(out);
  return out;
}

FiberFunction iterate_transfer(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                               const FiberFunction& g0, int n) {
  require_grid(g0);
  if (n < 0) throw Error(ErrorCode::kValidation, "iterate_transfer: n must be >= 0");
  GridKernel kernel(family, g0.size());
  std::vector<double> next;
  FiberFunction g = g0;
  for (int s = 0; s < n; ++s) {
    kernel.apply(path.at(s), potential, path.offset() + s, g.values(), next);
    g.mutable_values().swap(next);
    keep_in_range(g);
  }
  return g;
}

double log_tree_sum(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                    std::int64_t start, int depth, FiberPoint anchor) {
  if (depth < 0) throw Error(ErrorCode::kValidation, "tree depth must be >= 0");
  LogSum sum;
  tree_recurse(family, path, potential, start, depth, anchor, 0.0, sum);
  return sum.value();
}

FiberPoint default_anchor(const FiberFamily& family, Symbol symbol) {
  if (family.is_interval()) return {0.5, 0.0};
  family.check_symbol(symbol);
  const int d = family.degree_d;
  const std::complex<double> c = family.c[static_cast<std::size_t>(symbol)];
  // Damped Newton on z^d - z + c = 0 from z = 1.
  std::complex<double> z = 1.0;
  for (int it = 0; it < 200; ++it) {
    const std::complex<double> f = std::pow(z, d) - z + c;
    const std::complex<double> df = static_cast<double>(d) * std::pow(z, d - 1) - 1.0;
    std::complex<double> step = f / df;
    double damp = 1.0;
    while (damp > 1e-4 && std::abs(std::pow(z - damp * step, d) - (z - damp * step) + c) > std::abs(f)) damp *= 0.5;
    z -= damp * step;
    if (std::abs(step) * damp < 1e-15) break;
  }
  return z;
}

LambdaTrace lambda_trace(const FiberFamily& family, const SymbolPath& path, const Potential& potential, int n,
                         const LambdaOptions& options) {
  if (n < 1) throw Error(ErrorCode::kValidation, "lambda_trace: n must be >= 1");
  const int max_depth = options.max_depth > 0 ? options.max_depth : default_max_depth(family);
  LambdaTrace trace;
  trace.lambda.resize(static_cast<std::size_t>(n));
  trace.depth.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    double log_ratio = 0.0;
    double change = std::numeric_limits<double>::infinity();
    int k = options.fixed_depth ? std::max(1, max_depth / 2) : 1;
    int used = 1;
    while (true) {
      const FiberPoint y = options.anchor ? *options.anchor : default_anchor(family, path.at(j + k));
      const double num = log_tree_sum(family, path, potential, j, k, y);
      const double den = k > 1 ? log_tree_sum(family, path, potential, j + 1, k - 1, y) : 0.0;
      log_ratio = num - den;
      used = k;
      if (!std::isnan(prev)) {
        change = std::abs(std::expm1(log_ratio - prev));
        if (change < options.tol && !options.fixed_depth) break;
      }
      prev = log_ratio;
      if (k >= max_depth) break;
      k = options.fixed_depth ? max_depth : std::min(2 * k, max_depth);
    }
    if (!std::isfinite(log_ratio)) {
      throw Error(ErrorCode::kNumeric, "lambda_trace: non-finite ratio at step " + std::to_string(j));
    }
    trace.lambda[static_cast<std::size_t>(j)] = std::exp(log_ratio);
    trace.depth[static_cast<std::size_t>(j)] = used;
    if (!(change < options.tol) && !options.fixed_depth) {
      if (trace.converged) trace.first_failure = j;
      trace.converged = false;
    }
    if (std::isfinite(change)) trace.residual = std::max(trace.residual, change);
  }
  return trace;
}

double conformal_integral(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                          const FiberFunction& f, int depth) {
  require_grid(f);
  GridKernel kernel(family, f.size());
  const FiberFunction pf = push_forward(kernel, path, potential, f, 0, depth);
  const FiberFunction p1 = push_forward(kernel, path, potential, FiberFunction::constant(f.size(), 1.0), 0, depth);
  const double den = scaled_sum(p1);
  if (!(den > 0.0)) throw Error(ErrorCode::kNumeric, "conformal_integral: vanishing normalizer");
  return scaled_sum(pf) / den * std::exp(pf.log_scale() - p1.log_scale());
}

FiberFunction invariant_density(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                                int n_back, const DensityOptions& options) {
  if (n_back < 0) throw Error(ErrorCode::kValidation, "invariant_density: n_back must be >= 0");
  if (min_expansion_floor(family) <= 1.0) {
    throw Error(ErrorCode::kNotUniformlyExpanding, "invariant_density needs a uniformly expanding family");
  }
  const int m = options.grid_size;
  GridKernel kernel(family, m);
  std::vector<double> log_lambda(static_cast<std::size_t>(n_back));
  if (n_back > 0) {
    const LambdaTrace lt = lambda_trace(family, shift(path, -n_back), potential, n_back, options.lambda);
    if (!lt.converged) {
      throw Error(ErrorCode::kConvergence,
                  "invariant_density: lambda did not converge at backward step " + std::to_string(lt.first_failure));
    }
    for (int i = 0; i < n_back; ++i) log_lambda[static_cast<std::size_t>(i)] = std::log(lt.lambda[static_cast<std::size_t>(i)]);
  }
  // log_lambda[i] belongs to fiber x_{i - n_back}.
  std::vector<double> acc(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k <= n_back; ++k) {
    FiberFunction term = push_forward(kernel, path, potential, FiberFunction::constant(m, 1.0), -k, k);
    double log_norm = 0.0;
    for (int i = n_back - k; i < n_back; ++i) log_norm += log_lambda[static_cast<std::size_t>(i)];
    const double scale = std::exp(term.log_scale() - log_norm);
    for (int i = 0; i < m; ++i) acc[static_cast<std::size_t>(i)] += term.values()[static_cast<std::size_t>(i)] * scale;
  }
  FiberFunction q = FiberFunction::constant(m, 0.0);
  for (int i = 0; i < m; ++i) q.mutable_values()[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)] / (n_back + 1);
  const double mass = conformal_integral(family, path, potential, q, options.nu_depth);
  if (!(mass > 0.0)) throw Error(ErrorCode::kNumeric, "invariant_density: vanishing mass");
  for (double& v : q.mutable_values()) v /= mass;
  return q;
}

CylinderMasses conformal_cylinder_masses(const FiberFamily& family, const SymbolPath& path,
                                         const Potential& potential, int depth, std::int64_t max_cylinders) {
  if (!family.is_interval()) {
    throw Error(ErrorCode::kUnsupportedRepresentation, "cylinder masses are defined for interval families");
  }
  if (depth < 0) throw Error(ErrorCode::kValidation, "cylinder depth must be >= 0");
  std::vector<int> deg(static_cast<std::size_t>(depth));
  double count = 1.0;
  for (int j = 0; j < depth; ++j) {
    deg[static_cast<std::size_t>(j)] = family.degree(path.at(j));
    count *= deg[static_cast<std::size_t>(j)];
  }
  if (count > static_cast<double>(max_cylinders)) {
    throw Error(ErrorCode::kResource, "cylinder enumeration exceeds the cap of " + std::to_string(max_cylinders));
  }
  CylinderMasses result;
  result.approximate = !family.has_constant_derivatives();
  const auto total = static_cast<std::size_t>(count);
  result.cylinders.reserve(total);

  if (!result.approximate) {
    // Branch-constant data: each fiber contributes exp(phi_b) / lambda.
    std::vector<std::vector<double>> log_w(static_cast<std::size_t>(depth));
    for (int j = 0; j < depth; ++j) {
      const Symbol a = path.at(j);
      const auto& bs = family.branches[static_cast<std::size_t>(a)];
      auto& lw = log_w[static_cast<std::size_t>(j)];
      LogSum ls;
      for (std::size_t b = 0; b < bs.size(); ++b) {
        lw.push_back(potential.value(a, static_cast<int>(b), std::log(std::abs(bs[b].slope)), path.offset() + j));
        ls.add(lw.back());
      }
      const double log_lambda = ls.value();
      for (double& v : lw) v -= log_lambda;
    }
    std::vector<int> word(static_cast<std::size_t>(depth), 0);
    for (std::size_t c = 0; c < total; ++c) {
      double lm = 0.0;
      for (int j = 0; j < depth; ++j) lm += log_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(word[static_cast<std::size_t>(j)])];
      result.cylinders.push_back({word, std::exp(lm)});
      for (int j = depth - 1; j >= 0; --j) {
        if (++word[static_cast<std::size_t>(j)] < deg[static_cast<std::size_t>(j)]) break;
        word[static_cast<std::size_t>(j)] = 0;
      }
    }
    return result;
  }

  double log_lambda_sum = 0.0;
  if (depth > 0) {
    const LambdaTrace lt = lambda_trace(family, path, potential, depth);
    for (double l : lt.lambda) log_lambda_sum += std::log(l);
  }
  std::vector<int> word(static_cast<std::size_t>(depth), 0);
  double raw = 0.0;
  for (std::size_t c = 0; c < total; ++c) {
    double z = 0.5;
    double s = 0.0;
    for (int j = depth - 1; j >= 0; --j) {
      const Symbol a = path.at(j);
      const Branch& b = family.branches[static_cast<std::size_t>(a)][static_cast<std::size_t>(word[static_cast<std::size_t>(j)])];
      z = std::clamp(b.preimage(z), b.lo, b.hi);
      s += potential.value(a, word[static_cast<std::size_t>(j)], std::log(std::abs(b.deriv(z))), path.offset() + j);
    }
    const double mass = std::exp(s - log_lambda_sum);
    raw += mass;
    result.cylinders.push_back({word, mass});
    for (int j = depth - 1; j >= 0; --j) {
      if (++word[static_cast<std::size_t>(j)] < deg[static_cast<std::size_t>(j)]) break;
      word[static_cast<std::size_t>(j)] = 0;
    }
  }
  result.raw_sum = raw;
  for (auto& cm : result.cylinders) cm.mass /= raw;
  // Midpoint sums are within the distortion budget of any point's sums.
  double bound = 0.0;
  for (int j = 0; j < depth; ++j) {
    double prod = 1.0;
    for (int i = j; i < depth; ++i) prod *= expansion_floor(family, path.at(i));
    bound += potential.holder_constant(family, path.at(j)) * std::pow(prod, -family.geometry.alpha);
  }
  result.distortion_bound = bound;
  return result;
}

double holder_distortion_budget(const FiberFamily& family, const Potential& potential) {
  double h0 = 0.0;
  for (Symbol a = 0; a < family.num_symbols(); ++a) h0 = std::max(h0, potential.holder_constant(family, a));
  return holder_distortion_budget(h0, family.geometry.alpha, min_expansion_floor(family));
}

DistortionReport distortion_check(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                                  int n, const std::vector<std::pair<double, double>>& probes) {
  DistortionReport r;
  const double alpha = family.geometry.alpha;
  if (min_expansion_floor(family) > 1.0) r.uniform_q = holder_distortion_budget(family, potential);
  double path_budget = 0.0;
  for (int j = 0; j < n; ++j) {
    double prod = 1.0;
    for (int i = j; i < n; ++i) prod *= expansion_floor(family, path.at(i));
    path_budget += potential.holder_constant(family, path.at(j)) * std::pow(prod, -alpha);
  }
  r.worst_excess = -std::numeric_limits<double>::infinity();
  for (auto [w1, w2] : probes) {
    const double rho = std::abs(w1 - w2);
    if (rho > family.geometry.xi) continue;
    const double l1 = n > 0 ? log_tree_sum(family, path, potential, 0, n, {w1, 0.0}) : 0.0;
    const double l2 = n > 0 ? log_tree_sum(family, path, potential, 0, n, {w2, 0.0}) : 0.0;
    const double ratio = std::abs(l1 - l2);
    double budget = path_budget * std::pow(rho, alpha);
    if (r.uniform_q) budget = std::min(budget, *r.uniform_q * std::pow(rho, alpha));
    r.max_log_ratio = std::max(r.max_log_ratio, ratio);
    r.max_budget = std::max(r.max_budget, budget);
    r.worst_excess = std::max(r.worst_excess, ratio - budget);
  }
  if (!std::isfinite(r.worst_excess)) r.worst_excess = 0.0;
  r.violation = r.worst_excess > 1e-8;
  return r;
}

std::vector<double> correlation_series(const FiberFamily& family, const SymbolPath& path,
                                       const Potential& potential, const FiberFunction& f, const FiberFunction& g,
                                       int max_lag, const CorrelationOptions& options) {
  require_grid(f);
  require_grid(g);
  if (f.size() != options.density.grid_size || g.size() != options.density.grid_size) {
    throw Error(ErrorCode::kValidation, "correlation_series: observables must live on the density grid");
  }
  const int m = options.density.grid_size;
  const int nu_depth = options.density.nu_depth;
  const FiberFunction q = invariant_density(family, path, potential, options.n_back, options.density);
  const auto times = [](double a, double b) { return a * b; };
  const FiberFunction gq = g.pointwise(q, times);
  const double mu_g = conformal_integral(family, path, potential, gq, nu_depth);

  GridKernel kernel(family, m);
  FiberFunction u = gq;  // L^n (g q)
  FiberFunction v = q;   // L^n q
  std::vector<double> corr;
  corr.reserve(static_cast<std::size_t>(max_lag) + 1);
  for (int n = 0; n <= max_lag; ++n) {
    if (n > 0) {
      // Same per-step scale for u and v keeps their ratio exact.
      std::vector<double> nu_vals, nv_vals;
      kernel.apply(path.at(n - 1), potential, path.offset() + n - 1, u.values(), nu_vals);
      kernel.apply(path.at(n - 1), potential, path.offset() + n - 1, v.values(), nv_vals);
      const double sc = *std::max_element(nv_vals.begin(), nv_vals.end());
      for (double& x : nu_vals) x /= sc;
      for (double& x : nv_vals) x /= sc;
      u.mutable_values().swap(nu_vals);
      v.mutable_values().swap(nv_vals);
    }
    const SymbolPath at_n = shift(path, n);
    FiberFunction fu = f.pointwise(u, times);
    FiberFunction fv = f.pointwise(v, times);
    fu.set_log_scale(0.0);
    fv.set_log_scale(0.0);
    FiberFunction vv = v;
    vv.set_log_scale(0.0);
    const double a = conformal_integral(family, at_n, potential, fu, nu_depth);
    const double b = conformal_integral(family, at_n, potential, fv, nu_depth);
    const double norm = conformal_integral(family, at_n, potential, vv, nu_depth);
    corr.push_back((a - b * mu_g) / norm);
  }
  return corr;
}

}  // namespace randpress
