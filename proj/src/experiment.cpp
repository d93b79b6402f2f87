#include "randpress/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "randpress/classify.hpp"
#include "randpress/induce.hpp"
#include "randpress/julia.hpp"
#include "randpress/multifractal.hpp"
#include "randpress/pressure.hpp"
#include "randpress/transfer.hpp"

namespace randpress {

namespace {

using ordered_json = nlohmann::json;

const std::set<std::string> kOps = {"pressure", "bowen",  "classify", "spectrum", "decay",
                                    "induce",   "julia",  "describe", "transfer"};

// Reads one YAML mapping, remembering which keys were consumed so the rest
// can be reported as unknown. Problems are appended to a shared list.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::vector<std::string>& issues)
      : node_(std::move(node)), path_(std::move(path)), issues_(issues) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_[key].IsDefined() && !node_[key].IsNull();
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  std::optional<T> get(const std::string& key) {
    if (!has(key)) return std::nullopt;
    try {
      return node_[key].as<T>();
    } catch (const YAML::Exception&) {
      issues_.push_back(where(key) + ": expected " + type_name<T>());
      return std::nullopt;
    }
  }

  std::optional<int> integer(const std::string& key, long lo, long hi) {
    auto v = get<long>(key);
    if (!v) return std::nullopt;
    if (*v < lo || *v > hi) {
      issues_.push_back(where(key) + ": " + std::to_string(*v) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
      return std::nullopt;
    }
    return static_cast<int>(*v);
  }

  std::optional<double> real(const std::string& key, double lo, double hi, bool open_lo = false) {
    auto v = get<double>(key);
    if (!v) return std::nullopt;
    if (!std::isfinite(*v) || *v < lo || *v > hi || (open_lo && *v == lo)) {
      std::ostringstream os;
      os << where(key) << ": " << *v << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
      issues_.push_back(os.str());
      return std::nullopt;
    }
    return v;
  }

  void finish() {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) issues_.push_back(where(key) + ": unknown key");
    }
  }

 private:
  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, long> || std::is_same_v<T, int>) return "an integer";
    else if constexpr (std::is_same_v<T, double>) return "a number";
    else if constexpr (std::is_same_v<T, bool>) return "true or false";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "a list of numbers";
  }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> seen_;
};

std::optional<std::complex<double>> parse_complex(const YAML::Node& n) {
  try {
    if (n.IsScalar()) return std::complex<double>(n.as<double>(), 0.0);
    if (n.IsSequence() && n.size() == 2) return std::complex<double>(n[0].as<double>(), n[1].as<double>());
  } catch (const YAML::Exception&) {
  }
  return std::nullopt;
}

void parse_family(const YAML::Node& node, FamilySpec& fam, std::vector<std::string>& issues) {
  static const std::set<std::string> kinds = {"cantor", "two_slope", "doubling", "mean_example", "quadratic", "affine"};
  if (node.IsScalar()) {
    fam.kind = node.as<std::string>();
    if (!kinds.count(fam.kind)) issues.push_back("family: unknown kind '" + fam.kind + "'");
    return;
  }
  if (!node.IsMap()) {
    issues.push_back("family: expected a kind name or a mapping");
    return;
  }
  Section s(node, "family", issues);
  if (auto k = s.get<std::string>("kind")) {
    fam.kind = *k;
    if (!kinds.count(fam.kind)) issues.push_back("family.kind: unknown kind '" + fam.kind + "'");
  } else {
    issues.push_back("family.kind: required");
  }
  if (fam.kind == "two_slope") {
    if (auto v = s.real("s1", 1.0, 1e6, true)) fam.s1 = *v;
    if (auto v = s.real("s2", 1.0, 1e6, true)) fam.s2 = *v;
  }
  if (fam.kind == "quadratic") {
    if (auto v = s.integer("degree", 2, 16)) fam.degree = *v;
    if (s.has("c")) {
      const YAML::Node c = s.raw("c");
      fam.c.clear();
      if (c.IsSequence() && c.size() > 0) {
        for (std::size_t i = 0; i < c.size(); ++i) {
          auto z = parse_complex(c[i]);
          if (!z) issues.push_back("family.c[" + std::to_string(i) + "]: expected a number or [re, im]");
          else fam.c.push_back(*z);
        }
      } else if (auto z = parse_complex(c)) {
        fam.c.push_back(*z);
      } else {
        issues.push_back("family.c: expected a non-empty list");
      }
    }
  }
  if (fam.kind == "affine") {
    const YAML::Node d = s.raw("domains");
    bool ok = d.IsSequence() && d.size() > 0;
    if (ok) {
      try {
        for (const auto& sym : d) {
          std::vector<std::pair<double, double>> row;
          for (const auto& br : sym) row.emplace_back(br[0].as<double>(), br[1].as<double>());
          if (row.empty()) ok = false;
          fam.domains.push_back(row);
        }
      } catch (const YAML::Exception&) {
        ok = false;
      }
    }
    if (!ok) issues.push_back("family.domains: expected a list per symbol of [lo, hi] branch domains");
  }
  if (auto v = s.real("xi", 0.0, 1e6, true)) fam.xi = v;
  if (auto v = s.real("alpha", 0.0, 1.0, true)) fam.alpha = v;
  if (auto v = s.real("h0", 0.0, 1e6)) fam.h0 = v;
  s.finish();
}

void parse_process(const YAML::Node& node, ProcessSpec& p, std::vector<std::string>& issues) {
  if (!node.IsMap()) {
    issues.push_back("process: expected a mapping");
    return;
  }
  Section s(node, "process", issues);
  p.kind = s.get<std::string>("kind").value_or("");
  if (p.kind == "iid") {
    if (auto v = s.get<std::vector<double>>("probs")) {
      p.probs = *v;
      double sum = 0.0;
      bool neg = false;
      for (double x : p.probs) {
        sum += x;
        neg = neg || !(x >= 0.0);
      }
      if (p.probs.empty() || neg || std::abs(sum - 1.0) > 1e-9) {
        issues.push_back("process.probs: must be non-negative and sum to 1");
      }
    }
  } else if (p.kind == "deterministic") {
    if (auto v = s.integer("symbol", 0, 1 << 20)) p.symbol = *v;
  } else if (p.kind == "periodic") {
    if (auto v = s.get<std::vector<int>>("word")) {
      p.word = *v;
      if (p.word.empty() || std::any_of(p.word.begin(), p.word.end(), [](int x) { return x < 0; })) {
        issues.push_back("process.word: must be a non-empty list of symbols");
      }
    } else {
      issues.push_back("process.word: required for a periodic process");
    }
  } else {
    issues.push_back("process.kind: expected iid, deterministic or periodic");
  }
  s.finish();
}

void parse_potential(const YAML::Node& node, PotentialSpec& p, std::vector<std::string>& issues) {
  if (!node.IsMap()) {
    issues.push_back("potential: expected a mapping");
    return;
  }
  Section s(node, "potential", issues);
  p.kind = s.get<std::string>("kind").value_or("geometric");
  if (p.kind == "geometric") {
    if (auto v = s.real("t", -1e3, 1e3)) p.t = *v;
  } else if (p.kind == "branch_constant") {
    if (auto v = s.get<std::vector<std::vector<double>>>("values")) p.values = *v;
    else issues.push_back("potential.values: required (one list per symbol)");
  } else {
    issues.push_back("potential.kind: expected geometric or branch_constant");
  }
  s.finish();
}

void parse_knobs(const YAML::Node& node, Knobs& k, std::vector<std::string>& issues) {
  if (!node.IsMap()) {
    issues.push_back("knobs: expected a mapping");
    return;
  }
  Section s(node, "knobs", issues);
  k.n_steps = s.integer("n_steps", 1, 1000000);
  k.n_samples = s.integer("n_samples", 1, 10000000);
  k.depth = s.integer("depth", 1, 40);
  k.grid = s.integer("grid", 2, 1 << 20);
  k.max_depth = s.integer("max_depth", 0, 64);
  k.window = s.integer("window", 1, 24);
  k.n_back = s.integer("n_back", 0, 10000);
  k.max_lag = s.integer("max_lag", 1, 10000);
  k.n_max = s.integer("n_max", 1, 1 << 20);
  k.excursion_steps = s.integer("excursion_steps", 10, 10000000);
  k.n_iter = s.integer("n_iter", 1, 100000);
  k.tail_blocks = s.integer("tail_blocks", 1, 10000);
  k.ratio_samples = s.integer("ratio_samples", 1, 1000000);
  k.workers = s.integer("workers", 0, 4096);
  k.tol_t = s.real("tol_t", 0.0, 1.0, true);
  k.tol_lambda = s.real("tol_lambda", 0.0, 1.0, true);
  k.threshold = s.real("threshold", 0.0, 1e6, true);
  k.h = s.real("h", 0.0, 10.0);
  k.exact = s.get<bool>("exact");
  k.bowen = s.get<bool>("bowen");
  k.t_grid = s.get<std::vector<double>>("t_grid");
  k.q_grid = s.get<std::vector<double>>("q_grid");
  k.probe_q = s.get<std::vector<double>>("probe_q");
  for (auto* g : {&k.t_grid, &k.q_grid}) {
    if (*g && (*g)->empty()) issues.push_back("knobs: grids must be non-empty");
  }
  s.finish();
}

std::string word_string(const std::vector<int>& w) {
  const bool digits = std::all_of(w.begin(), w.end(), [](int x) { return x >= 0 && x < 10; });
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!digits && i > 0) s += '-';
    s += std::to_string(w[i]);
  }
  return s;
}

std::vector<double> range_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const int n = static_cast<int>(std::llround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) g.push_back(lo + step * i);
  return g;
}

ordered_json estimate_json(const ExpectedPressureEstimate& e) {
  return ordered_json{{"value", e.value},         {"stderr", e.std_error}, {"exact", e.exact},
                      {"n_steps", e.n_steps},     {"n_samples", e.n_samples}, {"failures", e.failures},
                      {"potential", e.potential}};
}

struct Context {
  const ExperimentConfig& cfg;
  FiberFamily family;
  BaseProcess process;
  Potential potential;
  int workers;

  MonteCarlo monte_carlo(int default_steps = 200, int default_samples = 200) const {
    MonteCarlo mc;
    mc.n_steps = cfg.knobs.n_steps.value_or(default_steps);
    mc.n_samples = cfg.knobs.n_samples.value_or(default_samples);
    mc.seed = cfg.seed;
    mc.workers = workers;
    mc.lambda.tol = cfg.knobs.tol_lambda.value_or(1e-10);
    mc.lambda.max_depth = cfg.knobs.max_depth.value_or(0);
    mc.prefer_exact = cfg.knobs.exact.value_or(true);
    return mc;
  }
};

ResultBundle op_pressure(const Context& c) {
  ResultBundle b;
  const MonteCarlo mc = c.monte_carlo();
  CsvTable t{"pressure", {"t", "EP", "stderr"}, {}};
  ordered_json rows = ordered_json::array();
  auto emit = [&](double tv, const Potential& pot) {
    const ExpectedPressureEstimate e = estimate_pressure(c.family, c.process, pot, mc);
    t.rows.push_back({format_real(tv), format_real(e.value), format_real(e.std_error)});
    ordered_json j = estimate_json(e);
    j["t"] = tv;
    rows.push_back(j);
  };
  if (c.cfg.knobs.t_grid) {
    for (double tv : *c.cfg.knobs.t_grid) emit(tv, Potential::geometric(tv));
  } else {
    emit(c.cfg.potential.kind == "geometric" ? c.cfg.potential.t : std::nan(""), c.potential);
  }
  b.summary["estimates"] = rows;
  b.tables.push_back(std::move(t));
  return b;
}

BowenResult run_bowen(const Context& c) {
  BowenOptions o;
  o.tol_t = c.cfg.knobs.tol_t.value_or(1e-4);
  o.mc = c.monte_carlo();
  return bowen_dimension(c.family, c.process, o);
}

ResultBundle op_bowen(const Context& c) {
  ResultBundle b;
  const BowenResult r = run_bowen(c);
  b.summary["h"] = r.h;
  b.summary["bracket"] = {r.t_lo, r.t_hi};
  b.summary["tolerance"] = r.tolerance;
  b.summary["tolerance_limited"] = r.tolerance_limited;
  b.summary["exact"] = r.exact;
  b.summary["samples"] = r.exact ? 0 : r.pressure_lo.n_samples;
  b.summary["n_steps"] = r.exact ? 0 : r.pressure_lo.n_steps;
  b.summary["evaluations"] = r.evaluations;
  return b;
}

ResultBundle op_classify(const Context& c) {
  ResultBundle b;
  double h = 0.0;
  if (c.cfg.knobs.h) {
    h = *c.cfg.knobs.h;
  } else {
    h = run_bowen(c).h;
  }
  ClassifyOptions o;
  o.threshold = c.cfg.knobs.threshold.value_or(1e-4);
  o.excursion_steps = c.cfg.knobs.excursion_steps.value_or(10000);
  o.variance.n_max = c.cfg.knobs.n_max.value_or(256);
  o.variance.n_samples = c.cfg.knobs.n_samples.value_or(2000);
  o.variance.seed = c.cfg.seed;
  o.variance.workers = c.workers;
  o.variance.lambda = c.monte_carlo().lambda;
  const ClassificationVerdict v = classify_system(c.family, c.process, h, o);
  b.summary["h"] = h;
  b.summary["sigma2"] = v.variance.sigma2;
  b.summary["stderr"] = v.variance.std_error;
  b.summary["verdict"] = verdict_name(v.verdict);
  b.summary["threshold"] = v.threshold;
  b.summary["consequences"] = v.consequences;
  b.summary["mean_pressure"] = v.variance.mean_pressure;
  b.summary["centered_warning"] = v.variance.centered_warning;
  b.summary["l_cap"] = v.l_cap;
  b.summary["max_abs_centered_sum"] = v.max_abs_centered_sum;
  b.summary["lil_max"] = v.lil_max;
  b.summary["lil_min"] = v.lil_min;

  CsvTable curve{"variance", {"n", "var_over_n", "stderr"}, {}};
  for (std::size_t i = 0; i < v.variance.ladder.size(); ++i) {
    curve.rows.push_back({std::to_string(v.variance.ladder[i]), format_real(v.variance.variance_curve[i]),
                          format_real(v.variance.curve_std_error[i])});
  }
  const int n_max = o.variance.n_max;
  const SymbolPath path = draw_base_point(c.process, n_max + 64, 0, substream_seed(c.cfg.seed, 0xE1));
  const GibbsExtremes ex = gibbs_ratio_extremes(c.family, path, h, n_max, o.variance.lambda);
  CsvTable ladder{"excursions", {"n", "running_min", "running_max"}, {}};
  for (std::size_t i = 0; i < ex.ladder.size(); ++i) {
    ladder.rows.push_back(
        {std::to_string(ex.ladder[i]), format_real(ex.running_min[i]), format_real(ex.running_max[i])});
  }
  b.tables.push_back(std::move(curve));
  b.tables.push_back(std::move(ladder));
  return b;
}

ResultBundle op_spectrum(const Context& c) {
  ResultBundle b;
  TemperatureOptions o;
  o.mc = c.monte_carlo();
  if (c.cfg.knobs.tol_t) o.mc_tol = *c.cfg.knobs.tol_t;
  const std::vector<double> q_grid = c.cfg.knobs.q_grid.value_or(range_grid(-3.0, 3.0, 0.25));
  const TemperatureCurve curve = temperature_curve(c.family, c.process, c.potential, q_grid, o);
  CsvTable tt{"temperature", {"q", "T", "dT", "dT_error"}, {}};
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    tt.rows.push_back({format_real(curve.q[i]), format_real(curve.value[i]), format_real(curve.derivative[i]),
                       format_real(curve.derivative_error[i])});
  }
  const SpectrumResult s = legendre_spectrum(curve);
  CsvTable st{"spectrum", {"q", "T", "alpha", "g"}, {}};
  for (const auto& p : s.points) {
    const auto it = std::find(curve.q.begin(), curve.q.end(), p.q);
    const double tv = it == curve.q.end() ? std::nan("") : curve.value[static_cast<std::size_t>(it - curve.q.begin())];
    st.rows.push_back({format_real(p.q), format_real(tv), format_real(p.alpha), format_real(p.g)});
  }
  b.summary["exact"] = curve.exact;
  b.summary["tolerance"] = curve.tolerance;
  b.summary["derivative_method"] = s.derivative_method;
  b.summary["convex"] = s.convex;
  b.summary["max_convexity_excess"] = s.max_convexity_excess;
  b.summary["concave"] = s.concave;
  b.summary["max_concavity_excess"] = s.max_concavity_excess;
  b.summary["tangency"] = s.tangency ? ordered_json(*s.tangency) : ordered_json(nullptr);
  b.summary["peak_gap"] = s.peak_gap ? ordered_json(*s.peak_gap) : ordered_json(nullptr);
  b.summary["alpha_positive"] = s.alpha_positive;
  b.summary["bounds_ok"] = s.bounds_ok;

  if (c.cfg.knobs.probe_q && !c.cfg.knobs.probe_q->empty()) {
    const NormalizedPotential phi(c.family, c.process, c.potential, o.mc);
    RatioOptions r;
    r.depth = c.cfg.knobs.depth.value_or(14);
    r.n_samples = c.cfg.knobs.ratio_samples.value_or(64);
    r.seed = substream_seed(c.cfg.seed, 0xD7);
    ordered_json probes = ordered_json::array();
    for (double q : *c.cfg.knobs.probe_q) {
      const DerivativeCrossCheck x = temperature_derivative(phi, q, o, r);
      probes.push_back({{"q", q},
                        {"finite_difference", x.finite_difference.value},
                        {"finite_difference_error", x.finite_difference.error},
                        {"ratio", x.ratio.value},
                        {"ratio_error", x.ratio.error},
                        {"agree", x.agree},
                        {"flagged", x.flagged}});
    }
    b.summary["derivative_checks"] = probes;
  }
  b.tables.push_back(std::move(tt));
  b.tables.push_back(std::move(st));
  return b;
}

ResultBundle op_decay(const Context& c) {
  if (!c.family.is_interval()) {
    throw Error(ErrorCode::kUnsupportedRepresentation, "decay needs an interval family (grid observables)");
  }
  ResultBundle b;
  CorrelationOptions o;
  o.n_back = c.cfg.knobs.n_back.value_or(24);
  o.density.grid_size = c.cfg.knobs.grid.value_or(kDefaultGridSize);
  o.density.lambda = c.monte_carlo().lambda;
  const int max_lag = c.cfg.knobs.max_lag.value_or(12);
  const SymbolPath path =
      draw_base_point(c.process, max_lag + o.density.nu_depth + 8, o.n_back + 1, c.cfg.seed);
  const int m = o.density.grid_size;
  const FiberFunction id = FiberFunction::sample(m, [](double y) { return y; });
  const FiberFunction one = FiberFunction::constant(m, 1.0);
  const std::vector<double> corr = correlation_series(c.family, path, c.potential, id, id, max_lag, o);
  const std::vector<double> flat = correlation_series(c.family, path, c.potential, id, one, max_lag, o);
  CsvTable t{"correlations", {"n", "corr", "corr_constant_g"}, {}};
  double flat_max = 0.0;
  for (int n = 0; n <= max_lag; ++n) {
    const auto i = static_cast<std::size_t>(n);
    t.rows.push_back({std::to_string(n), format_real(corr[i]), format_real(flat[i])});
    flat_max = std::max(flat_max, std::abs(flat[i]));
  }
  // Least-squares slope of log|corr(n)| over n = 2..min(12, max_lag).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (int n = 2; n <= std::min(12, max_lag); ++n) {
    const double y = std::log(std::abs(corr[static_cast<std::size_t>(n)]));
    if (!std::isfinite(y)) continue;
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
    ++k;
  }
  ordered_json slope = nullptr;
  if (k >= 2) slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  b.summary["fitted_slope"] = slope;
  b.summary["fit_points"] = k;
  b.summary["max_abs_corr_constant_g"] = flat_max;
  b.summary["n_back"] = o.n_back;
  b.summary["grid"] = m;
  b.tables.push_back(std::move(t));
  return b;
}

ResultBundle op_induce(const Context& c) {
  ResultBundle b;
  InducedOptions o;
  o.window = c.cfg.knobs.window.value_or(8);
  if (c.cfg.knobs.n_steps) o.n_steps = *c.cfg.knobs.n_steps;
  if (c.cfg.knobs.n_samples) o.n_samples = *c.cfg.knobs.n_samples;
  if (c.cfg.knobs.tail_blocks) o.tail_blocks = *c.cfg.knobs.tail_blocks;
  if (c.cfg.knobs.grid) o.grid_size = *c.cfg.knobs.grid;
  if (c.cfg.knobs.max_depth) o.lambda.max_depth = *c.cfg.knobs.max_depth;
  o.seed = c.cfg.seed;
  o.workers = c.workers;
  const ExpandingSetSpec set = find_expanding_set(c.family, c.process, o.window);
  const BlockCheck chk = exhaustive_block_check(set);
  b.summary["window"] = set.depth;
  b.summary["level"] = set.level;
  b.summary["stable"] = set.stable;
  b.summary["measure"] = set.measure;
  b.summary["certified_measure"] = set.certified_measure;
  b.summary["accepted"] = set.accepted;
  b.summary["undecided"] = set.undecided;
  b.summary["mean_log_floor"] = set.mean_log_floor;
  b.summary["block_check"] = {{"blocks", chk.blocks},
                              {"extended", chk.extended},
                              {"beyond_window", chk.beyond_window},
                              {"min_log_product", chk.min_log_product},
                              {"ok", chk.ok}};

  CsvTable table{"decision_table", {"window", "status", "certified", "probability"}, {}};
  for (std::uint64_t code = 0; code < set.table.size(); ++code) {
    const std::vector<Symbol> w = set.window(code);
    table.rows.push_back({word_string(w), window_status_name(set.table[code]), set.certified[code] ? "1" : "0",
                          format_real(window_probability(c.process, w))});
  }

  const std::vector<double> ts = c.cfg.knobs.t_grid.value_or(std::vector<double>{0.0, 0.3});
  CsvTable cons{"consistency",
                {"t", "direct", "direct_stderr", "induced", "induced_stderr", "difference", "combined_error", "agree"},
                {}};
  ordered_json checks = ordered_json::array();
  for (double t : ts) {
    const InducedConsistency r = induced_pressure_consistency(c.family, c.process, set, t, o);
    cons.rows.push_back({format_real(t), format_real(r.direct.value), format_real(r.direct.std_error),
                         format_real(r.induced.value), format_real(r.induced.std_error), format_real(r.difference),
                         format_real(r.combined_error), r.agree ? "1" : "0"});
    checks.push_back({{"t", t},
                      {"direct", r.direct.value},
                      {"induced", r.induced.value},
                      {"difference", r.difference},
                      {"combined_error", r.combined_error},
                      {"paired_error", r.paired_error},
                      {"mean_tau", r.mean_tau},
                      {"kac_product", r.kac_product},
                      {"agree", r.agree}});
  }
  b.summary["consistency"] = checks;
  if (c.cfg.knobs.bowen.value_or(true)) {
    const BowenResult r = induced_bowen(c.family, c.process, set, o, c.cfg.knobs.tol_t.value_or(2e-3));
    b.summary["h"] = r.h;
    b.summary["bracket"] = {r.t_lo, r.t_hi};
    b.summary["tolerance"] = r.tolerance;
    b.summary["tolerance_limited"] = r.tolerance_limited;
  }
  b.tables.push_back(std::move(table));
  b.tables.push_back(std::move(cons));
  return b;
}

ResultBundle op_julia(const Context& c) {
  ResultBundle b;
  JuliaOptions o;
  o.depth = c.cfg.knobs.depth.value_or(18);
  o.samples = c.cfg.knobs.n_samples.value_or(32);
  o.seed = c.cfg.seed;
  o.workers = c.workers;
  o.tol_t = c.cfg.knobs.tol_t.value_or(1e-3);
  const JuliaEnsemble ens(c.family, c.process, o);
  CsvTable t{"julia_pressure", {"t", "pressure", "stderr", "depth"}, {}};
  for (double tv : c.cfg.knobs.t_grid.value_or(range_grid(0.0, 2.0, 0.25))) {
    const ExpectedPressureEstimate e = ens.pressure(tv);
    t.rows.push_back({format_real(tv), format_real(e.value), format_real(e.std_error), std::to_string(o.depth)});
  }
  const JuliaBowen r = julia_bowen(ens, o);
  b.summary["h"] = r.h;
  b.summary["bracket"] = {r.t_lo, r.t_hi};
  b.summary["depth"] = r.depth;
  b.summary["samples"] = r.samples;
  b.summary["tolerance"] = r.tolerance;
  b.summary["tolerance_limited"] = r.tolerance_limited;
  b.summary["anchor_reseeds"] = ens.reseeds();
  b.tables.push_back(std::move(t));
  return b;
}

ResultBundle op_transfer(const Context& c) {
  if (!c.family.is_interval()) {
    throw Error(ErrorCode::kUnsupportedRepresentation, "transfer grids need an interval family");
  }
  ResultBundle b;
  const int n = c.cfg.knobs.n_iter.value_or(10);
  const int m = c.cfg.knobs.grid.value_or(kDefaultGridSize);
  const int depth = c.cfg.knobs.depth.value_or(4);
  const SymbolPath path = draw_base_point(c.process, std::max(n, depth) + 1, 0, c.cfg.seed);
  const FiberFunction ln = iterate_transfer(c.family, path, c.potential, FiberFunction::constant(m, 1.0), n);
  CsvTable grid{"transfer_grid", {"y", "value", "log_value"}, {}};
  for (int i = 0; i < ln.size(); ++i) {
    const double v = ln.values()[static_cast<std::size_t>(i)];
    grid.rows.push_back({format_real(ln.node(i)), format_real(v * std::exp(ln.log_scale())),
                         format_real(std::log(v) + ln.log_scale())});
  }
  const CylinderMasses cm = conformal_cylinder_masses(c.family, path, c.potential, depth);
  CsvTable masses{"cylinder_masses", {"word", "mass"}, {}};
  double total = 0.0;
  for (const auto& cyl : cm.cylinders) {
    masses.rows.push_back({word_string(cyl.word), format_real(cyl.mass)});
    total += cyl.mass;
  }
  std::vector<int> word;
  for (int i = 0; i < std::max(n, depth); ++i) word.push_back(path.at(i));
  b.summary["symbols"] = word_string(word);
  b.summary["n_iter"] = n;
  b.summary["log_scale"] = ln.log_scale();
  b.summary["depth"] = depth;
  b.summary["cylinders"] = cm.cylinders.size();
  b.summary["mass_sum"] = total;
  b.summary["approximate"] = cm.approximate;
  b.summary["distortion_bound"] = cm.distortion_bound;
  b.tables.push_back(std::move(grid));
  b.tables.push_back(std::move(masses));
  return b;
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorCode::kConfiguration, "config must be a mapping at the top level");
  ExperimentConfig cfg;
  cfg.source = text;
  std::vector<std::string> issues;
  Section top(root, "", issues);
  if (auto op = top.get<std::string>("op")) {
    cfg.op = *op;
    if (!kOps.count(cfg.op)) issues.push_back("op: unknown operation '" + cfg.op + "'");
  }
  if (top.has("family")) parse_family(top.raw("family"), cfg.family, issues);
  else issues.push_back("family: required");
  if (top.has("process")) parse_process(top.raw("process"), cfg.process, issues);
  if (top.has("potential")) parse_potential(top.raw("potential"), cfg.potential, issues);
  if (top.has("t")) {
    if (top.has("potential")) issues.push_back("t: give either a top-level t or a potential section, not both");
    else if (auto t = top.real("t", -1e3, 1e3)) cfg.potential.t = *t;
  }
  if (top.has("knobs")) parse_knobs(top.raw("knobs"), cfg.knobs, issues);
  if (top.has("seed")) {
    try {
      const long long s = top.raw("seed").as<long long>();
      if (s < 0) issues.push_back("seed: must be non-negative");
      else cfg.seed = static_cast<std::uint64_t>(s);
    } catch (const YAML::Exception&) {
      issues.push_back("seed: expected an integer");
    }
  }
  if (auto out = top.get<std::string>("out")) cfg.out = *out;
  top.finish();
  if (!issues.empty()) throw Error(ErrorCode::kValidation, "invalid configuration", issues);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfiguration, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

FiberFamily build_family(const FamilySpec& spec) {
  FiberFamily f;
  if (spec.kind == "cantor") f = cantor_family();
  else if (spec.kind == "two_slope") f = two_slope_family(spec.s1, spec.s2);
  else if (spec.kind == "doubling") f = doubling_family();
  else if (spec.kind == "mean_example") f = mean_example_family();
  else if (spec.kind == "quadratic") f = quadratic_family(spec.degree, spec.c);
  else if (spec.kind == "affine") f = affine_full_family(spec.domains);
  else throw Error(ErrorCode::kConfiguration, "unknown family kind '" + spec.kind + "'");
  if (spec.xi) f.geometry.xi = *spec.xi;
  if (spec.alpha) f.geometry.alpha = *spec.alpha;
  if (spec.h0) f.geometry.h0 = *spec.h0;
  f.validate();
  return f;
}

BaseProcess build_process(const ProcessSpec& spec, const FiberFamily& family) {
  BaseProcess p;
  if (spec.kind.empty() || (spec.kind == "iid" && spec.probs.empty())) {
    const int k = family.num_symbols();
    p = k > 1 || spec.kind == "iid" ? BaseProcess::iid(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k))
              : BaseProcess::deterministic(0);
  } else if (spec.kind == "iid") {
    p = BaseProcess::iid(spec.probs);
  } else if (spec.kind == "deterministic") {
    p = BaseProcess::deterministic(spec.symbol);
  } else {
    p = BaseProcess::periodic(spec.word);
  }
  p.validate();
  std::vector<std::string> bad;
  for (Symbol s = 0; s < p.alphabet_size(); ++s) {
    const bool used = p.kind != ProcessKind::kIidFinite || p.probs[static_cast<std::size_t>(s)] > 0.0;
    if (used && s >= family.num_symbols()) bad.push_back("process uses symbol " + std::to_string(s));
  }
  if (p.kind == ProcessKind::kDeterministic && p.fixed >= family.num_symbols()) {
    bad.push_back("process uses symbol " + std::to_string(p.fixed));
  }
  for (Symbol s : p.word) {
    if (s >= family.num_symbols()) bad.push_back("process word uses symbol " + std::to_string(s));
  }
  if (!bad.empty()) {
    throw Error(ErrorCode::kValidation,
                "process alphabet exceeds the family's " + std::to_string(family.num_symbols()) + " symbols", bad);
  }
  return p;
}

Potential build_potential(const PotentialSpec& spec) {
  if (spec.kind == "branch_constant") return Potential::branch_constant(spec.values);
  return Potential::geometric(spec.t);
}

ResultBundle run_experiment(const ExperimentConfig& config) {
  if (config.op.empty()) throw Error(ErrorCode::kValidation, "no operation given", {"op: required"});
  ResultBundle b;
  if (config.op == "describe") {
    b.summary = describe(config);
  } else {
    const FiberFamily family = build_family(config.family);
    Context c{config, family, build_process(config.process, family), build_potential(config.potential),
              config.knobs.workers.value_or(0)};
    if (config.op == "pressure") b = op_pressure(c);
    else if (config.op == "bowen") b = op_bowen(c);
    else if (config.op == "classify") b = op_classify(c);
    else if (config.op == "spectrum") b = op_spectrum(c);
    else if (config.op == "decay") b = op_decay(c);
    else if (config.op == "induce") b = op_induce(c);
    else if (config.op == "julia") b = op_julia(c);
    else if (config.op == "transfer") b = op_transfer(c);
    else throw Error(ErrorCode::kValidation, "unknown operation", {"op: " + config.op});
  }
  nlohmann::json out;
  out["op"] = config.op;
  out["family"] = config.family.kind;
  out["result"] = b.summary;
  out["provenance"] = {{"config_hash", content_hash(config.source)}, {"seed", config.seed}, {"version", kVersion}};
  b.summary = out;
  return b;
}

nlohmann::json describe(const ExperimentConfig& config) {
  const FiberFamily f = build_family(config.family);
  nlohmann::json j;
  j["name"] = f.name;
  j["symbols"] = f.num_symbols();
  std::vector<int> degrees;
  std::vector<double> floors;
  for (Symbol a = 0; a < f.num_symbols(); ++a) {
    degrees.push_back(f.degree(a));
    floors.push_back(expansion_floor(f, a));
  }
  j["degrees"] = degrees;
  j["floors"] = floors;
  if (f.is_interval()) {
    nlohmann::json table = nlohmann::json::array();
    for (Symbol a = 0; a < f.num_symbols(); ++a) {
      nlohmann::json rows = nlohmann::json::array();
      for (const Branch& br : f.branches[static_cast<std::size_t>(a)]) {
        nlohmann::json r{{"lo", br.lo},
                         {"hi", br.hi},
                         {"affine", br.affine},
                         {"min_abs_derivative", br.min_abs_derivative},
                         {"max_abs_derivative", br.max_abs_derivative}};
        if (br.affine) {
          r["slope"] = br.slope;
          r["intercept"] = br.intercept;
        }
        rows.push_back(r);
      }
      table.push_back(rows);
    }
    j["branches"] = table;
  } else {
    j["degree"] = f.degree_d;
    nlohmann::json cs = nlohmann::json::array();
    double delta = 0.0;
    for (const auto& c : f.c) {
      cs.push_back({c.real(), c.imag()});
      delta = std::max(delta, std::abs(c));
    }
    j["c"] = cs;
    j["delta"] = delta;
    j["delta_bound"] = quadratic_delta_bound(f.degree_d);
  }
  const Admissibility adm = check_admissibility(f);
  j["admissible"] = adm.ok;
  j["admissibility_messages"] = adm.messages;
  // Mean expansion sign under the configured (or default) base process.
  try {
    const BaseProcess p = build_process(config.process, f);
    const std::vector<double> freq = p.frequencies();
    double mean = 0.0;
    for (std::size_t a = 0; a < freq.size(); ++a) {
      if (freq[a] > 0.0) mean += freq[a] * std::log(floors[a]);
    }
    j["mean_log_floor"] = mean;
    j["mean_expanding"] = mean > 0.0;
  } catch (const Error& e) {
    j["mean_log_floor"] = nullptr;
    j["process_error"] = e.what();
  }
  j["uniformly_expanding"] = min_expansion_floor(f) > 1.0;
  j["geometry"] = {{"xi", f.geometry.xi}, {"alpha", f.geometry.alpha}, {"h0", f.geometry.h0}};
  return j;
}

std::string to_csv(const CsvTable& table) {
  std::string s;
  for (std::size_t i = 0; i < table.header.size(); ++i) s += (i ? "," : "") + table.header[i];
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += '\n';
  }
  return s;
}

void write_bundle(const ResultBundle& bundle, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kResource, "cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::kResource, "cannot write '" + name + "' under '" + dir + "'");
  };
  put("summary.json", bundle.summary.dump(2) + "\n");
  for (const auto& t : bundle.tables) put(t.name + ".csv", to_csv(t));
}

nlohmann::json error_json(const Error& e) {
  return {{"error", {{"code", std::string(e.name())}, {"message", e.what()}, {"details", e.details()}}}};
}

}  // namespace randpress
