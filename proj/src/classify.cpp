#include "randpress/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "randpress/error.hpp"
#include "randpress/parallel.hpp"

namespace randpress {

namespace {

std::vector<int> dyadic_ladder(int n_max) {
  std::vector<int> ladder;
  for (int n = 1; n < n_max; n *= 2) ladder.push_back(n);
  ladder.push_back(n_max);
  return ladder;
}

/// Sample variance and its standard error (fourth-moment formula).
std::pair<double, double> variance_with_error(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  const double var = m2 / (n - 1.0);
  const double mu2 = m2 / n;
  const double mu4 = m4 / n;
  const double var_of_var = std::max(0.0, (mu4 - (n - 3.0) / (n - 1.0) * mu2 * mu2) / n);
  return {var, std::sqrt(var_of_var)};
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kEssential: return "Essential";
    case Verdict::kQuasiDeterministic: return "QuasiDeterministic";
    case Verdict::kInconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

VarianceEstimate asymptotic_variance(const FiberFamily& family, const BaseProcess& process,
                                     const Potential& potential_at_h, const VarianceOptions& options) {
  if (options.n_samples < 2) throw Error(ErrorCode::kValidation, "asymptotic_variance: need >= 2 samples");
  if (options.n_max < 1) throw Error(ErrorCode::kValidation, "asymptotic_variance: n_max must be >= 1");
  const std::vector<int> ladder = dyadic_ladder(options.n_max);
  const auto n_rungs = ladder.size();
  const auto n_samples = static_cast<std::size_t>(options.n_samples);
  // sums[r][s]: S_{ladder[r]} P for sample s
  std::vector<std::vector<double>> sums(n_rungs, std::vector<double>(n_samples));
  std::vector<RunningStats> step_stats(n_samples);
  parallel_for(options.n_samples, options.workers, [&](std::int64_t s) {
    const SymbolPath path =
        draw_base_point(process, options.n_max, 0, substream_seed(options.seed, static_cast<std::uint64_t>(s)));
    const PressureTrace tr = pressure_trace(family, path, potential_at_h, options.n_max, options.lambda);
    for (std::size_t r = 0; r < n_rungs; ++r) sums[r][static_cast<std::size_t>(s)] = tr.sum(ladder[r]);
    step_stats[static_cast<std::size_t>(s)] = birkhoff_stats(tr.values);
  });

  VarianceEstimate est;
  est.ladder = ladder;
  RunningStats per_step;
  for (const auto& st : step_stats) per_step.merge(st);
  est.per_step_variance = per_step.variance();
  for (std::size_t r = 0; r < n_rungs; ++r) {
    // Centering across samples is implicit in the sample variance.
    auto [var, err] = variance_with_error(sums[r]);
    est.variance_curve.push_back(var / ladder[r]);
    est.curve_std_error.push_back(err / ladder[r]);
  }
  est.sigma2 = est.variance_curve.back();
  est.std_error = est.curve_std_error.back();
  RunningStats last;
  for (double v : sums.back()) last.push(v / options.n_max);
  est.mean_pressure = last.mean;
  est.mean_std_error = last.stderr_of_mean();
  est.centered_warning = std::abs(last.mean) > 3.0 * est.mean_std_error + 1e-12;
  return est;
}

ClassificationVerdict classify_system(const FiberFamily& family, const BaseProcess& process, double h,
                                      const ClassifyOptions& options) {
  ClassificationVerdict v;
  v.threshold = options.threshold;
  const Potential phi = Potential::geometric(h);
  v.variance = asymptotic_variance(family, process, phi, options.variance);

  // One long run for the excursion statistics.
  const int n = std::max(options.excursion_steps, 10);
  const SymbolPath path = draw_base_point(process, n, 0, substream_seed(options.variance.seed, 0xC1A551F1ULL));
  const PressureTrace tr = pressure_trace(family, path, phi, n, options.variance.lambda);
  const double mean = v.variance.mean_pressure;
  double a_max = 0.0;
  for (double p : tr.values) a_max = std::max(a_max, std::abs(p - mean));
  // Constant pressure gives a_max = 0; the floor absorbs round-off.
  v.l_cap = std::max(options.l_cap_factor * a_max, 1e-9);
  v.lil_max = -std::numeric_limits<double>::infinity();
  v.lil_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k) {
    const double centered = tr.sum(k) - k * mean;
    v.max_abs_centered_sum = std::max(v.max_abs_centered_sum, std::abs(centered));
    if (k >= 3) {
      const double scale = std::sqrt(k * std::log(std::log(static_cast<double>(k))));
      v.lil_max = std::max(v.lil_max, centered / scale);
      v.lil_min = std::min(v.lil_min, centered / scale);
    }
  }
  if (!std::isfinite(v.lil_max)) v.lil_max = v.lil_min = 0.0;

  const double s2 = v.variance.sigma2;
  const double band = 3.0 * v.variance.std_error;
  if (s2 - band > options.threshold) {
    v.verdict = Verdict::kEssential;
    v.consequences = "H^h = 0, P^h = infinity: h-dimensional Hausdorff measure vanishes and packing measure is "
                     "infinite on almost every fiber";
  } else if (s2 + band < options.threshold && v.max_abs_centered_sum <= v.l_cap) {
    v.verdict = Verdict::kQuasiDeterministic;
    v.consequences = "pressure is a coboundary: h-dimensional Hausdorff and packing measures are positive and "
                     "finite (geometric-measure regime)";
  } else {
    v.verdict = Verdict::kInconclusive;
    v.consequences = "variance too close to the threshold or sums unbounded at this run length";
  }
  return v;
}

GibbsExtremes gibbs_ratio_extremes(const FiberFamily& family, const SymbolPath& path, double h, int n_max,
                                   const LambdaOptions& lambda) {
  if (n_max < 10) throw Error(ErrorCode::kValidation, "gibbs_ratio_extremes: N must be >= 10");
  const PressureTrace tr = pressure_trace(family, path, Potential::geometric(h), n_max, lambda);
  GibbsExtremes out;
  out.ladder = dyadic_ladder(n_max);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t r = 0;
  for (int k = 1; k <= n_max; ++k) {
    const double v = std::exp(-tr.sum(k));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (r < out.ladder.size() && k == out.ladder[r]) {
      out.running_min.push_back(lo);
      out.running_max.push_back(hi);
      ++r;
    }
  }
  return out;
}

}  // namespace randpress
