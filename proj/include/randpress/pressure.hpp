#pragma once

// Fiber pressures P_x = log lambda_x, their Birkhoff sums, the expected
// pressure E P, and Bowen's root t -> E P(-t log|T'|) = 0.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"
#include "randpress/potential.hpp"
#include "randpress/transfer.hpp"

namespace randpress {

struct PressureTrace {
  SymbolPath path;
  std::string potential;
  std::vector<double> values;        // P_{x_j}, j = 0..n-1
  std::vector<double> partial_sums;  // S_k P_x, k = 0..n
  int max_depth = 1;
  double tol = 0.0;
  bool converged = true;
  std::int64_t error_index = -1;     // first step whose lambda did not settle

  int size() const { return static_cast<int>(values.size()); }
  double sum(int k) const { return partial_sums[static_cast<std::size_t>(k)]; }
};

/// log lambda_a for every symbol when the fiber pressure is exactly
/// symbol-local: constant |T'| on each branch and no per-step shift.
std::optional<std::vector<double>> symbol_local_log_lambda(const FiberFamily& family, const Potential& potential);

PressureTrace pressure_trace(const FiberFamily& family, const SymbolPath& path, const Potential& potential, int n,
                             const LambdaOptions& options = {});

struct MonteCarlo {
  int n_steps = 200;
  int n_samples = 200;
  std::uint64_t seed = 1;
  int workers = 0;
  LambdaOptions lambda;
  /// Callers that accept either route use the exact symbol-local expectation
  /// when it exists (see estimate_pressure).
  bool prefer_exact = true;
};

struct ExpectedPressureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n_steps = 0;
  int n_samples = 0;   // samples that entered the mean
  int failures = 0;    // samples dropped for unsettled lambda
  bool exact = false;  // closed-form symbol-local expectation, no sampling
  std::string potential;
};

/// Builds the potential for one sampled path; used when the potential needs
/// path data (per-step pressure normalization).
using PotentialForPath = std::function<Potential(const SymbolPath&)>;

/// Mean over independent base samples of S_n P / n.
ExpectedPressureEstimate expected_pressure(const FiberFamily& family, const BaseProcess& process,
                                           const Potential& potential, const MonteCarlo& mc);
ExpectedPressureEstimate expected_pressure(const FiberFamily& family, const BaseProcess& process,
                                           const PotentialForPath& potential, const MonteCarlo& mc);

/// sum_a freq(a) log lambda_a when the pressure is symbol-local; this is the
/// exact expectation for every supported base process.
std::optional<double> exact_expected_pressure(const FiberFamily& family, const BaseProcess& process,
                                              const Potential& potential);

/// Exact expectation when available and allowed, Monte Carlo otherwise.
ExpectedPressureEstimate estimate_pressure(const FiberFamily& family, const BaseProcess& process,
                                           const Potential& potential, const MonteCarlo& mc);

struct BowenOptions {
  double t_lo = 0.0;
  double t_hi = 0.0;  // 0: ambient dimension
  double tol_t = 1e-4;
  MonteCarlo mc;
};

struct BowenResult {
  double h = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  ExpectedPressureEstimate pressure_lo;
  ExpectedPressureEstimate pressure_hi;
  bool exact = false;
  double tolerance = 0.0;          // achieved bracket width target
  bool tolerance_limited = false;  // MC noise exceeds tol_t near the root
  int evaluations = 0;
};

/// Bisection for the zero of a decreasing pressure function, given as
/// t -> estimate. Shared by every Bowen-type solver.
BowenResult bisect_pressure_zero(const std::function<ExpectedPressureEstimate(double)>& pressure, double t_lo,
                                 double t_hi, double tol_t, double bound_hi, bool exact);

BowenResult bowen_dimension(const FiberFamily& family, const BaseProcess& process, const BowenOptions& options = {});

struct PressurePoint {
  double q = 0.0;
  double t = 0.0;
  ExpectedPressureEstimate estimate;
};

struct ConvexityReport {
  bool degenerate = false;
  int segments_checked = 0;
  int violations = 0;
  double max_violation = 0.0;      // max of EP(mid) - (EP(a)+EP(b))/2 - 3 sigma
  double min_t_strictness = 0.0;   // min of (EP(a)+EP(b))/2 - EP(mid) along t
  double max_t_second_difference = 0.0;
  double min_monotone_margin = 0.0;  // min of EP(t1)-EP(t2)-(t2-t1) log gamma* + 6 sigma along t
  std::vector<PressurePoint> grid;
};

/// Evaluates E P(q phi - t log|T'|) on the (q,t) grid with common random
/// numbers and checks midpoint convexity along rows, columns and diagonals.
ConvexityReport pressure_convexity_probe(const FiberFamily& family, const BaseProcess& process,
                                         const Potential& phi, const std::vector<double>& q_grid,
                                         const std::vector<double>& t_grid, const MonteCarlo& mc);

}  // namespace randpress
