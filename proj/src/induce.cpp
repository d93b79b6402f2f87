#include "randpress/induce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "randpress/error.hpp"
#include "randpress/parallel.hpp"

namespace randpress {

namespace {

// Products this close to 1 count as not expanding.
constexpr double kLogSlack = 1e-12;

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

WindowStatus combine(WindowStatus a, WindowStatus b) { return a == b ? a : WindowStatus::kUndecided; }

struct Refiner {
  int alphabet;
  int depth;
  std::vector<double> log_floor;
  double min_log = 0.0;  // over symbols the process can emit
  double max_log = 0.0;
  std::vector<std::uint64_t> pow;

  // Return strictly after the window: p times at least one unknown factor.
  WindowStatus tail(double lp) const {
    if (min_log >= 0.0 && lp + min_log > kLogSlack) return WindowStatus::kAccept;
    if (max_log <= 0.0 && lp + max_log <= kLogSlack) return WindowStatus::kReject;
    return WindowStatus::kUndecided;
  }

  // Status of a word of length L at the next level. Undecided suffixes are
  // resolved both ways and the word is decided only if both agree.
  WindowStatus refine(const std::vector<std::vector<WindowStatus>>& prev, int L, std::uint64_t code) const {
    const WindowStatus self = prev[static_cast<std::size_t>(L)][code];
    if (self != WindowStatus::kAccept) return self;
    std::vector<double> lp(static_cast<std::size_t>(L) + 1, 0.0);
    for (int i = 0; i < L; ++i) {
      const auto digit = static_cast<std::size_t>((code / pow[static_cast<std::size_t>(L - 1 - i)]) % alphabet);
      lp[static_cast<std::size_t>(i) + 1] = lp[static_cast<std::size_t>(i)] + log_floor[digit];
    }
    WindowStatus r = tail(lp[static_cast<std::size_t>(L)]);
    for (int n = L; n >= 1; --n) {
      const WindowStatus s = prev[static_cast<std::size_t>(L - n)][code % pow[static_cast<std::size_t>(L - n)]];
      const WindowStatus acc = lp[static_cast<std::size_t>(n)] > kLogSlack ? WindowStatus::kAccept : WindowStatus::kReject;
      if (s == WindowStatus::kAccept) {
        r = acc;
      } else if (s == WindowStatus::kUndecided) {
        r = combine(acc, r);
      }
    }
    return r;
  }
};

}  // namespace

const char* window_status_name(WindowStatus s) {
  switch (s) {
    case WindowStatus::kAccept:
      return "accept";
    case WindowStatus::kReject:
      return "reject";
    case WindowStatus::kUndecided:
      return "undecided";
  }
  return "?";
}

std::uint64_t ExpandingSetSpec::code(const std::vector<Symbol>& w) const {
  std::uint64_t c = 0;
  for (Symbol s : w) c = c * static_cast<std::uint64_t>(alphabet) + static_cast<std::uint64_t>(s);
  return c;
}

std::vector<Symbol> ExpandingSetSpec::window(std::uint64_t c) const {
  std::vector<Symbol> w(static_cast<std::size_t>(depth));
  for (int i = depth - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<Symbol>(c % static_cast<std::uint64_t>(alphabet));
    c /= static_cast<std::uint64_t>(alphabet);
  }
  return w;
}

bool ExpandingSetSpec::accepts(const SymbolPath& path, std::int64_t i) const {
  std::uint64_t c = 0;
  for (int k = 0; k < depth; ++k) {
    const Symbol s = path.at(i + k);
    if (s < 0 || s >= alphabet) return false;
    c = c * static_cast<std::uint64_t>(alphabet) + static_cast<std::uint64_t>(s);
  }
  return table[c] == WindowStatus::kAccept;
}

double window_probability(const BaseProcess& process, const std::vector<Symbol>& w) {
  switch (process.kind) {
    case ProcessKind::kIidFinite: {
      double p = 1.0;
      for (Symbol s : w) {
        if (s < 0 || s >= static_cast<int>(process.probs.size())) return 0.0;
        p *= process.probs[static_cast<std::size_t>(s)];
      }
      return p;
    }
    case ProcessKind::kDeterministic:
      return std::all_of(w.begin(), w.end(), [&](Symbol s) { return s == process.fixed; }) ? 1.0 : 0.0;
    case ProcessKind::kPeriodicWord: {
      const std::size_t period = process.word.size();
      int hits = 0;
      for (std::size_t phase = 0; phase < period; ++phase) {
        bool match = true;
        for (std::size_t i = 0; i < w.size() && match; ++i) match = process.word[(phase + i) % period] == w[i];
        hits += match ? 1 : 0;
      }
      return static_cast<double>(hits) / static_cast<double>(period);
    }
  }
  return 0.0;
}

ExpandingSetSpec find_expanding_set(const FiberFamily& family, const BaseProcess& process, int depth) {
  process.validate();
  if (depth < 1 || depth > 24) throw Error(ErrorCode::kValidation, "expanding set window must be in [1, 24]");
  const int K = family.num_symbols();
  const std::vector<double> freq = process.frequencies();
  if (static_cast<int>(freq.size()) > K) {
    throw Error(ErrorCode::kConfiguration, "process emits symbols the family does not define");
  }
  if (std::pow(static_cast<double>(K), depth + 1) > static_cast<double>(std::int64_t{1} << 27)) {
    throw Error(ErrorCode::kResource, "decision table too large for this alphabet and window");
  }
  Refiner rf{K, depth, {}, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), {}};
  ExpandingSetSpec spec;
  spec.depth = depth;
  spec.alphabet = K;
  for (Symbol a = 0; a < K; ++a) {
    const double lg = std::log(expansion_floor(family, a));
    rf.log_floor.push_back(lg);
    const double f = a < static_cast<int>(freq.size()) ? freq[static_cast<std::size_t>(a)] : 0.0;
    if (f > 0.0) {
      spec.mean_log_floor += f * lg;
      rf.min_log = std::min(rf.min_log, lg);
      rf.max_log = std::max(rf.max_log, lg);
    }
  }
  spec.log_floors = rf.log_floor;
  if (!(spec.mean_log_floor > 0.0)) {
    throw Error(ErrorCode::kNotMeanExpanding,
                "integral of log gamma is not positive: " + std::to_string(spec.mean_log_floor));
  }
  for (int L = 0; L <= depth + 1; ++L) rf.pow.push_back(ipow(static_cast<std::uint64_t>(K), L));

  std::vector<std::vector<WindowStatus>> mem(static_cast<std::size_t>(depth) + 1);
  for (int L = 0; L <= depth; ++L) mem[static_cast<std::size_t>(L)].assign(rf.pow[static_cast<std::size_t>(L)], WindowStatus::kAccept);

  // Each refinement needs one more symbol of lookahead, so on a finite window
  // the accepted set can drain to nothing instead of settling. Keep the row of
  // length-W statuses for every level and pick the level whose accepted mass
  // is best certified by the following level.
  std::vector<std::vector<WindowStatus>> rows{mem[static_cast<std::size_t>(depth)]};
  std::vector<double> prob(rows[0].size());
  for (std::uint64_t c = 0; c < prob.size(); ++c) prob[c] = window_probability(process, spec.window(c));
  const int max_levels = 4 * depth + 8;  // every window is undecided well before this
  for (int level = 1; level <= max_levels; ++level) {
    std::vector<std::vector<WindowStatus>> next(mem.size());
    bool changed = false;
    bool any = false;
    for (int L = 0; L <= depth; ++L) {
      auto& row = next[static_cast<std::size_t>(L)];
      row.resize(mem[static_cast<std::size_t>(L)].size());
      for (std::uint64_t c = 0; c < row.size(); ++c) {
        row[c] = rf.refine(mem, L, c);
        if ((row[c] == WindowStatus::kAccept) != (mem[static_cast<std::size_t>(L)][c] == WindowStatus::kAccept)) {
          changed = true;
        }
        if (L == depth && row[c] == WindowStatus::kAccept) any = true;
      }
    }
    mem = std::move(next);
    rows.push_back(mem[static_cast<std::size_t>(depth)]);
    if (!changed) {
      spec.stable = true;
      break;
    }
    if (!any) break;
  }

  // A fixed point certifies itself.
  if (spec.stable) rows.push_back(rows.back());
  int best = -1;
  double best_fraction = -1.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    double m = 0.0;
    double cert = 0.0;
    for (std::uint64_t c = 0; c < prob.size(); ++c) {
      if (rows[k][c] != WindowStatus::kAccept) continue;
      m += prob[c];
      if (rows[k + 1][c] == WindowStatus::kAccept) cert += prob[c];
    }
    if (m > 0.0 && cert / m > best_fraction + 1e-12) {
      best_fraction = cert / m;
      best = static_cast<int>(k);
    }
  }
  if (best < 0) {
    throw Error(ErrorCode::kDepthInsufficient,
                "no window of length " + std::to_string(depth) + " is certified expanding; increase the depth");
  }
  spec.level = best;
  spec.table = rows[static_cast<std::size_t>(best)];
  spec.certified.assign(spec.table.size(), false);
  for (std::uint64_t c = 0; c < spec.table.size(); ++c) {
    if (spec.table[c] == WindowStatus::kAccept) {
      ++spec.accepted;
      spec.measure += prob[c];
      if (rows[static_cast<std::size_t>(best) + 1][c] == WindowStatus::kAccept) {
        spec.certified[c] = true;
        spec.certified_measure += prob[c];
      }
    } else if (spec.table[c] == WindowStatus::kUndecided) {
      ++spec.undecided;
    }
  }
  if (!(spec.measure > 0.0)) {
    throw Error(ErrorCode::kDepthInsufficient,
                "no window of length " + std::to_string(depth) + " is certified expanding; increase the depth");
  }
  return spec;
}

BlockCheck exhaustive_block_check(const ExpandingSetSpec& set, std::int64_t max_sequences) {
  const auto K = static_cast<std::uint64_t>(set.alphabet);
  const int W = set.depth;
  const std::uint64_t n_cont = ipow(K, W);
  if (static_cast<double>(set.accepted) * static_cast<double>(n_cont) > static_cast<double>(max_sequences)) {
    throw Error(ErrorCode::kResource, "exhaustive block check exceeds the sequence budget");
  }
  const std::uint64_t top = ipow(K, W - 1);
  BlockCheck chk;
  chk.min_log_product = std::numeric_limits<double>::infinity();
  for (std::uint64_t c = 0; c < set.table.size(); ++c) {
    if (set.table[c] != WindowStatus::kAccept) continue;
    const std::vector<Symbol> head = set.window(c);
    for (std::uint64_t e = 0; e < n_cont; ++e) {
      const std::vector<Symbol> tailw = set.window(e);
      std::uint64_t code = c;
      double lp = 0.0;
      bool first_visit = true;
      bool closed = false;
      for (int n = 1; n <= W; ++n) {
        lp += set.log_floors[static_cast<std::size_t>(head[static_cast<std::size_t>(n - 1)])];
        code = (code % top) * K + static_cast<std::uint64_t>(tailw[static_cast<std::size_t>(n - 1)]);
        if (set.table[code] != WindowStatus::kAccept) continue;
        if (first_visit && !(lp > kLogSlack)) {
          ++chk.extended;
          if (set.certified[c]) chk.ok = false;  // a certified window must return expanding
        }
        first_visit = false;
        if (lp > kLogSlack) {
          ++chk.blocks;
          chk.min_log_product = std::min(chk.min_log_product, lp);
          closed = true;
          break;
        }
      }
      if (!closed) ++chk.beyond_window;
    }
  }
  return chk;
}

double InducedBlock::expansion() const { return std::exp(log_expansion); }

std::vector<InducedBlock> induced_path(const FiberFamily& family, const ExpandingSetSpec& set,
                                       const SymbolPath& path, int n_blocks) {
  if (n_blocks < 0) throw Error(ErrorCode::kValidation, "number of blocks must be non-negative");
  const std::int64_t limit = path.n_forward() - set.depth;  // last index whose window is materialized
  std::int64_t j = 0;
  while (j <= limit && !set.accepts(path, j)) ++j;
  if (j > limit) {
    throw Error(ErrorCode::kPathTooShort, "no visit to the expanding set within the materialized path");
  }
  std::vector<InducedBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(n_blocks));
  while (static_cast<int>(blocks.size()) < n_blocks) {
    InducedBlock b;
    b.start = j;
    std::int64_t m = j;
    do {
      const Symbol s = path.at(m);
      family.check_symbol(s);
      b.word.push_back(s);
      b.log_expansion += set.log_floors[static_cast<std::size_t>(s)];
      ++m;
      if (m > limit) {
        throw Error(ErrorCode::kPathTooShort, "path ends before the next return to the expanding set");
      }
    } while (!(b.log_expansion > kLogSlack && set.accepts(path, m)));
    b.tau = static_cast<int>(b.word.size());
    if (!(b.log_expansion > kLogSlack)) {
      throw Error(ErrorCode::kInternal, "return block with expansion product <= 1",
                  {"start " + std::to_string(b.start), "tau " + std::to_string(b.tau)});
    }
    blocks.push_back(std::move(b));
    j = m;
  }
  return blocks;
}

double induced_potential(const FiberFamily& family, const Potential& potential, const SymbolPath& path,
                         const InducedBlock& block, double z) {
  if (!family.is_interval()) throw Error(ErrorCode::kUnsupportedRepresentation, "induced potential needs interval fibers");
  double sum = 0.0;
  for (int j = 0; j < block.tau; ++j) {
    const Symbol s = block.word[static_cast<std::size_t>(j)];
    const auto& bs = family.branches[static_cast<std::size_t>(s)];
    int br = -1;
    for (std::size_t b = 0; b < bs.size(); ++b) {
      if (bs[b].contains(z)) {
        br = static_cast<int>(b);
        break;
      }
    }
    if (br < 0) throw Error(ErrorCode::kOutsideRepeller, "point leaves the repeller inside the block");
    const Branch& b = bs[static_cast<std::size_t>(br)];
    sum += potential.value(s, br, std::log(std::abs(b.deriv(z))), path.offset() + block.start + j);
    z = b.forward(z);
  }
  return sum;
}

namespace {

// Direct enumeration is used while the block has at most this many composed
// preimages; longer blocks are applied one fiber at a time.
constexpr double kMaxBlockLeaves = 64.0;

double block_sum(const FiberFamily& family, const Potential& potential, const SymbolPath& path,
                 const InducedBlock& block, const FiberFunction& g, int level, double w, double acc) {
  if (level < 0) return g.interpolate(w) * std::exp(acc);
  const Symbol s = block.word[static_cast<std::size_t>(level)];
  const auto& bs = family.branches[static_cast<std::size_t>(s)];
  double total = 0.0;
  for (std::size_t b = 0; b < bs.size(); ++b) {
    const double z = bs[b].preimage(w);
    const double phi = potential.value(s, static_cast<int>(b), std::log(std::abs(bs[b].deriv(z))),
                                       path.offset() + block.start + level);
    total += block_sum(family, potential, path, block, g, level - 1, z, acc + phi);
  }
  return total;
}

}  // namespace

FiberFunction apply_induced_transfer(const FiberFamily& family, const Potential& potential, const SymbolPath& path,
                                     const InducedBlock& block, const FiberFunction& g) {
  if (!family.is_interval()) throw Error(ErrorCode::kUnsupportedRepresentation, "induced transfer needs interval fibers");
  double leaves = 1.0;
  for (Symbol s : block.word) leaves *= family.degree(s);
  if (leaves > kMaxBlockLeaves) {
    FiberFunction h = g;
    for (int j = 0; j < block.tau; ++j) {
      h = apply_transfer(family, block.word[static_cast<std::size_t>(j)], potential, h, path.offset() + block.start + j);
    }
    h.renormalize();
    return h;
  }
  FiberFunction out = FiberFunction::constant(g.size(), 0.0);
  auto& v = out.mutable_values();
  for (int i = 0; i < g.size(); ++i) {
    v[static_cast<std::size_t>(i)] = block_sum(family, potential, path, block, g, block.tau - 1, g.node(i), 0.0);
  }
  out.set_log_scale(g.log_scale());
  out.renormalize();
  return out;
}

namespace {

struct RouteSamples {
  std::vector<double> direct;
  std::vector<double> induced;
  std::vector<char> ok;
  std::vector<double> tau_sum;
  std::vector<double> block_count;
};

RouteSamples sample_routes(const FiberFamily& family, const BaseProcess& process, const ExpandingSetSpec& set,
                           const Potential& potential, const InducedOptions& o, bool with_direct) {
  if (o.n_steps < 10) throw Error(ErrorCode::kValidation, "induced pressure: n_steps must be >= 10");
  if (o.n_samples < 2) throw Error(ErrorCode::kValidation, "induced pressure: n_samples must be >= 2");
  if (o.tail_blocks < 1) throw Error(ErrorCode::kValidation, "induced pressure: tail_blocks must be >= 1");
  const auto N = static_cast<std::size_t>(o.n_samples);
  RouteSamples r{std::vector<double>(N), std::vector<double>(N), std::vector<char>(N, 0), std::vector<double>(N),
                 std::vector<double>(N)};
  parallel_for(o.n_samples, o.workers, [&](std::int64_t s) {
    const auto k = static_cast<std::size_t>(s);
    // Generous materialization; indices are computed on demand anyway.
    const std::int64_t horizon = 64 * static_cast<std::int64_t>(o.n_steps + o.tail_blocks + set.depth) + 4096;
    const SymbolPath path = draw_base_point(process, horizon, 0, substream_seed(o.seed, static_cast<std::uint64_t>(s)));
    std::vector<InducedBlock> blocks;
    int consumed = 0;
    int n_main = 0;
    {
      // Grow the block list until the main part covers n_steps.
      int want = std::max(8, o.n_steps / 2);
      for (;;) {
        blocks = induced_path(family, set, path, want + o.tail_blocks);
        consumed = 0;
        n_main = 0;
        for (int b = 0; b < want && consumed < o.n_steps; ++b) {
          consumed += blocks[static_cast<std::size_t>(b)].tau;
          ++n_main;
        }
        if (consumed >= o.n_steps) break;
        want *= 2;
      }
      blocks.resize(static_cast<std::size_t>(n_main + o.tail_blocks));
    }
    const double y = 0.5;
    auto run = [&](int from) {
      FiberFunction g = FiberFunction::constant(o.grid_size, 1.0);
      for (std::size_t b = static_cast<std::size_t>(from); b < blocks.size(); ++b) {
        g = apply_induced_transfer(family, potential, path, blocks[b], g);
      }
      return std::log(g.interpolate(y)) + g.log_scale();
    };
    r.induced[k] = (run(0) - run(n_main)) / consumed;
    r.tau_sum[k] = consumed;
    r.block_count[k] = n_main;
    r.ok[k] = 1;
    if (with_direct) {
      const SymbolPath start = shift(path, blocks.front().start);
      const LambdaTrace tr = lambda_trace(family, start, potential, consumed, o.lambda);
      double sum = 0.0;
      for (double l : tr.lambda) sum += std::log(l);
      r.direct[k] = sum / consumed;
      r.ok[k] = tr.converged ? 1 : 0;
    }
  });
  return r;
}

ExpectedPressureEstimate summarize(const std::vector<double>& v, const std::vector<char>& ok, int n_steps,
                                   const std::string& descr) {
  RunningStats st;
  ExpectedPressureEstimate e;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (ok[i]) {
      st.push(v[i]);
    } else {
      ++e.failures;
    }
  }
  if (st.count == 0) throw Error(ErrorCode::kConvergence, "no sample produced a settled pressure estimate");
  e.value = st.mean;
  e.std_error = st.stderr_of_mean();
  e.n_steps = n_steps;
  e.n_samples = static_cast<int>(st.count);
  e.potential = descr;
  return e;
}

}  // namespace

ExpectedPressureEstimate induced_pressure(const FiberFamily& family, const BaseProcess& process,
                                          const ExpandingSetSpec& set, const Potential& potential,
                                          const InducedOptions& options) {
  const RouteSamples r = sample_routes(family, process, set, potential, options, false);
  return summarize(r.induced, r.ok, options.n_steps, potential.describe());
}

InducedConsistency induced_pressure_consistency(const FiberFamily& family, const BaseProcess& process,
                                                const ExpandingSetSpec& set, double t, const InducedOptions& options) {
  const Potential phi = Potential::geometric(t);
  const RouteSamples r = sample_routes(family, process, set, phi, options, true);
  InducedConsistency c;
  c.t = t;
  c.direct = summarize(r.direct, r.ok, options.n_steps, phi.describe());
  c.induced = summarize(r.induced, r.ok, options.n_steps, phi.describe());
  c.difference = c.induced.value - c.direct.value;
  c.combined_error = std::hypot(c.direct.std_error, c.induced.std_error);
  RunningStats diff;
  double taus = 0.0;
  double blocks = 0.0;
  for (std::size_t i = 0; i < r.ok.size(); ++i) {
    if (!r.ok[i]) continue;
    diff.push(r.induced[i] - r.direct[i]);
    taus += r.tau_sum[i];
    blocks += r.block_count[i];
  }
  c.paired_error = diff.stderr_of_mean();
  c.mean_tau = blocks > 0 ? taus / blocks : 0.0;
  c.kac_product = c.mean_tau * set.measure;
  c.agree = std::abs(c.difference) <= 3.0 * c.combined_error + 1e-12;
  return c;
}

BowenResult induced_bowen(const FiberFamily& family, const BaseProcess& process, const ExpandingSetSpec& set,
                          const InducedOptions& options, double tol_t) {
  auto fn = [&](double t) { return induced_pressure(family, process, set, Potential::geometric(t), options); };
  return bisect_pressure_zero(fn, 0.0, 1.0, tol_t, family.ambient_dimension() * 2.0, false);
}

MeanExampleBowen mean_example_bowen(const InducedOptions& options, double tol_t) {
  const FiberFamily family = mean_example_family();
  const BaseProcess process = BaseProcess::iid({0.5, 0.5}, "iid(1/2,1/2)");
  MeanExampleBowen out;
  out.set = find_expanding_set(family, process, options.window);
  out.root = induced_bowen(family, process, out.set, options, tol_t);
  out.within_bound = out.root.h <= out.bound;
  return out;
}

}  // namespace randpress
