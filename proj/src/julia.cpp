#include "randpress/julia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "randpress/error.hpp"
#include "randpress/parallel.hpp"
#include "randpress/transfer.hpp"

namespace randpress {

namespace {

struct TreeBuilder {
  const FiberFamily& family;
  const std::vector<Symbol>& word;
  int d;
  double log_d;
  std::vector<std::complex<double>> unity;
  InverseTree& out;
  bool keep;

  void descend(int level, std::complex<double> w, double acc) {
    if (level < 0) {
      out.log_derivative_sums.push_back(acc);
      if (keep) out.leaves.push_back(w);
      return;
    }
    const std::complex<double> c = family.c[static_cast<std::size_t>(word[static_cast<std::size_t>(level)])];
    const std::complex<double> u = w - c;
    if (std::abs(u) < 1e-14 * std::max(1.0, std::abs(c))) {
      throw Error(ErrorCode::kSingularity, "inverse tree hit the critical value");
    }
    const std::complex<double> r = d == 2 ? std::sqrt(u) : std::pow(u, 1.0 / d);
    // |f'(z)| = d |z|^(d-1) and |z| = |u|^(1/d) for every root.
    const double ld = log_d + (d - 1) * std::log(std::abs(u)) / d;
    for (int k = 0; k < d; ++k) descend(level - 1, r * unity[static_cast<std::size_t>(k)], acc + ld);
  }
};

}  // namespace

InverseTree build_inverse_tree(const FiberFamily& family, const SymbolPath& path, int depth, bool keep_leaves) {
  if (family.is_interval()) throw Error(ErrorCode::kUnsupportedRepresentation, "inverse trees here are for polynomial families");
  if (depth < 1) throw Error(ErrorCode::kValidation, "tree depth must be >= 1");
  const int d = family.degree_d;
  if (std::pow(static_cast<double>(d), depth) > static_cast<double>(std::int64_t{1} << 22)) {
    throw Error(ErrorCode::kResource, "inverse tree would exceed 2^22 leaves");
  }
  InverseTree tree;
  tree.depth = depth;
  for (int i = 0; i < depth; ++i) {
    tree.word.push_back(path.at(i));
    family.check_symbol(tree.word.back());
  }
  std::vector<std::complex<double>> unity;
  for (int k = 0; k < d; ++k) unity.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / d));
  const FiberPoint base = default_anchor(family, 0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    tree.anchor = base * std::polar(1.0, 0.1 * attempt);
    tree.log_derivative_sums.clear();
    tree.leaves.clear();
    tree.log_derivative_sums.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(d), depth)));
    TreeBuilder b{family, tree.word, d, std::log(static_cast<double>(d)), unity, tree, keep_leaves};
    try {
      b.descend(depth - 1, tree.anchor, 0.0);
      return tree;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularity) throw;
      ++tree.reseeds;
    }
  }
  throw Error(ErrorCode::kSingularity, "inverse tree keeps hitting the critical value after re-seeding the anchor");
}

namespace {

double log_sum_neg(const std::vector<double>& sums, double t) {
  double m = -std::numeric_limits<double>::infinity();
  for (double s : sums) m = std::max(m, -t * s);
  double acc = 0.0;
  for (double s : sums) acc += std::exp(-t * s - m);
  return m + std::log(acc);
}

}  // namespace

double tree_log_sum(const InverseTree& tree, double t) { return log_sum_neg(tree.log_derivative_sums, t); }

TreeCheck verify_inverse_tree(const FiberFamily& family, const InverseTree& tree) {
  if (tree.leaves.empty()) throw Error(ErrorCode::kValidation, "tree was built without leaves");
  TreeCheck chk;
  chk.leaves = tree.leaves.size();
  const double scale = std::max(1.0, std::abs(tree.anchor));
  for (FiberPoint z : tree.leaves) {
    for (Symbol s : tree.word) z = apply_map(family, s, z);
    chk.max_relative_error = std::max(chk.max_relative_error, std::abs(z - tree.anchor) / scale);
  }
  // Nearest pair through a coarse hash; pairs in distant cells are far apart.
  const double cell = 1e-6;
  auto key = [&](FiberPoint z, long dx, long dy) {
    const auto ix = static_cast<long long>(std::floor(z.real() / cell)) + dx;
    const auto iy = static_cast<long long>(std::floor(z.imag() / cell)) + dy;
    return static_cast<unsigned long long>(ix) * 0x9E3779B97F4A7C15ull ^ static_cast<unsigned long long>(iy);
  };
  std::unordered_multimap<unsigned long long, std::size_t> grid;
  chk.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tree.leaves.size(); ++i) {
    const FiberPoint z = tree.leaves[i];
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto range = grid.equal_range(key(z, dx, dy));
        for (auto it = range.first; it != range.second; ++it) {
          chk.min_separation = std::min(chk.min_separation, std::abs(z - tree.leaves[it->second]));
        }
      }
    }
    grid.emplace(key(z, 0, 0), i);
  }
  chk.ok = chk.max_relative_error <= 1e-8 && chk.min_separation > 1e-10;
  return chk;
}

void require_julia_admissible(const FiberFamily& family) {
  if (family.is_interval()) throw Error(ErrorCode::kConfiguration, "not a polynomial family");
  const double bound = quadratic_delta_bound(family.degree_d);
  for (const auto& c : family.c) {
    if (!(std::abs(c) < bound)) {
      throw Error(ErrorCode::kHypothesisViolation,
                  "|c| = " + std::to_string(std::abs(c)) + " is not below delta(" + std::to_string(family.degree_d) +
                      ") = " + std::to_string(bound));
    }
  }
}

JuliaEnsemble::JuliaEnsemble(const FiberFamily& family, const BaseProcess& process, const JuliaOptions& o)
    : depth_(o.depth), workers_(o.workers) {
  require_julia_admissible(family);
  process.validate();
  if (o.samples < 1) throw Error(ErrorCode::kValidation, "julia: samples must be >= 1");
  if (family.degree_d == 2 && o.depth > 22) throw Error(ErrorCode::kValidation, "julia: depth must be <= 22 for d = 2");
  sums_.resize(static_cast<std::size_t>(o.samples));
  std::vector<int> reseeds(static_cast<std::size_t>(o.samples), 0);
  parallel_for(o.samples, o.workers, [&](std::int64_t s) {
    const SymbolPath path = draw_base_point(process, o.depth, 0, substream_seed(o.seed, static_cast<std::uint64_t>(s)));
    InverseTree tree = build_inverse_tree(family, path, o.depth);
    sums_[static_cast<std::size_t>(s)] = std::move(tree.log_derivative_sums);
    reseeds[static_cast<std::size_t>(s)] = tree.reseeds;
  });
  for (int r : reseeds) reseeds_ += r;
}

ExpectedPressureEstimate JuliaEnsemble::pressure(double t) const {
  std::vector<double> per(sums_.size());
  parallel_for(static_cast<std::int64_t>(sums_.size()), workers_, [&](std::int64_t s) {
    per[static_cast<std::size_t>(s)] = log_sum_neg(sums_[static_cast<std::size_t>(s)], t) / depth_;
  });
  RunningStats st;
  for (double v : per) st.push(v);
  ExpectedPressureEstimate e;
  e.value = st.mean;
  e.std_error = st.stderr_of_mean();
  e.n_steps = depth_;
  e.n_samples = static_cast<int>(st.count);
  e.potential = "geometric(t=" + std::to_string(t) + ")";
  return e;
}

ExpectedPressureEstimate julia_pressure(const FiberFamily& family, const BaseProcess& process, double t,
                                        const JuliaOptions& options) {
  return JuliaEnsemble(family, process, options).pressure(t);
}

ExpectedPressureEstimate julia_pressure(int d, const std::vector<std::complex<double>>& c,
                                        const BaseProcess& process, double t, const JuliaOptions& options) {
  return julia_pressure(quadratic_family(d, c), process, t, options);
}

JuliaBowen julia_bowen(const JuliaEnsemble& ensemble, const JuliaOptions& options) {
  auto fn = [&](double t) { return ensemble.pressure(t); };
  const BowenResult r = bisect_pressure_zero(fn, 0.0, options.t_hi, options.tol_t, options.t_hi, false);
  JuliaBowen out;
  out.h = r.h;
  out.t_lo = r.t_lo;
  out.t_hi = r.t_hi;
  out.depth = ensemble.depth();
  out.samples = ensemble.samples();
  out.tolerance = r.tolerance;
  out.tolerance_limited = r.tolerance_limited;
  out.evaluations = r.evaluations;
  return out;
}

JuliaBowen julia_bowen(const FiberFamily& family, const BaseProcess& process, const JuliaOptions& options) {
  return julia_bowen(JuliaEnsemble(family, process, options), options);
}

JuliaBowen julia_bowen(int d, const std::vector<std::complex<double>>& c, const BaseProcess& process,
                       const JuliaOptions& options) {
  return julia_bowen(quadratic_family(d, c), process, options);
}

}  // namespace randpress
