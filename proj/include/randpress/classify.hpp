#pragma once

// Essential vs quasi-deterministic systems: the asymptotic variance of the
// Birkhoff sums of the fiber pressure at the Bowen parameter separates them.

#include <cstdint>
#include <string>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"
#include "randpress/potential.hpp"
#include "randpress/pressure.hpp"

namespace randpress {

struct VarianceEstimate {
  double sigma2 = 0.0;                  // Var(S_n)/n at the last rung
  double std_error = 0.0;
  double per_step_variance = 0.0;
  std::vector<int> ladder;              // n = 1, 2, 4, ..., n_max
  std::vector<double> variance_curve;   // Var(S_n)/n per rung
  std::vector<double> curve_std_error;
  double mean_pressure = 0.0;           // mean of S_n P / n at the last rung
  double mean_std_error = 0.0;
  bool centered_warning = false;        // |mean| exceeded 3 sigma, sums were centered
};

struct VarianceOptions {
  int n_max = 256;
  int n_samples = 2000;
  std::uint64_t seed = 1;
  int workers = 0;
  LambdaOptions lambda;
};

/// Var(S_n P) / n on a dyadic ladder of n, from independent samples.
VarianceEstimate asymptotic_variance(const FiberFamily& family, const BaseProcess& process,
                                     const Potential& potential_at_h, const VarianceOptions& options = {});

enum class Verdict { kEssential, kQuasiDeterministic, kInconclusive };

std::string verdict_name(Verdict v);

struct ClassificationVerdict {
  Verdict verdict = Verdict::kInconclusive;
  VarianceEstimate variance;
  double threshold = 1e-4;
  double l_cap = 0.0;
  double max_abs_centered_sum = 0.0;
  double lil_max = 0.0;  // max over n >= 3 of S_nP / sqrt(n log log n), centered
  double lil_min = 0.0;
  std::string consequences;
};

struct ClassifyOptions {
  double threshold = 1e-4;
  double l_cap_factor = 10.0;
  VarianceOptions variance;
  int excursion_steps = 10000;  // length of the single-path LIL run
};

ClassificationVerdict classify_system(const FiberFamily& family, const BaseProcess& process, double h,
                                      const ClassifyOptions& options = {});

struct GibbsExtremes {
  std::vector<int> ladder;
  std::vector<double> running_min;  // of exp(-S_n P_x), n <= ladder rung
  std::vector<double> running_max;
};

/// Running extremes of mu_x(C_n)/diam(C_n)^h = exp(-S_n P_x) along one path.
GibbsExtremes gibbs_ratio_extremes(const FiberFamily& family, const SymbolPath& path, double h, int n_max,
                                   const LambdaOptions& lambda = {});

}  // namespace randpress
