#pragma once

// Temperature function T(q), the unique zero in t of
//   E P(q (phi - P_x(phi)) - t log|T'|),
// and its concave Legendre transform g(alpha) = inf_q (alpha q + T(q)).

#include <optional>
#include <string>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"
#include "randpress/potential.hpp"
#include "randpress/pressure.hpp"

namespace randpress {

struct TemperatureOptions {
  double t_lo = -10.0;
  double t_hi = 10.0;
  double tol = 1e-10;        // bisection width for exact pressure
  double mc_tol = 1e-4;      // bisection width under Monte Carlo
  double fd_step = 1e-2;     // central-difference step for T'
  MonteCarlo mc;
};

struct TemperatureValue {
  double q = 0.0;
  double value = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double tolerance = 0.0;
  bool exact = false;
};

/// Resolved phi with its fiber pressure, ready to build phi_{q,t}.
class NormalizedPotential {
 public:
  NormalizedPotential(const FiberFamily& family, const BaseProcess& process, Potential phi,
                      const MonteCarlo& mc);

  const Potential& phi() const { return phi_; }
  const FiberFamily& family() const { return family_; }
  const BaseProcess& process() const { return process_; }
  const MonteCarlo& monte_carlo() const { return mc_; }
  bool symbol_local() const { return local_.has_value(); }
  /// E P(phi) estimate used for the normalization check.
  const ExpectedPressureEstimate& base_pressure() const { return base_pressure_; }

  /// phi_{q,t} on a given path (the path matters only without symbol-local
  /// pressure, where P_x(phi) is read off that path's trace).
  Potential at(double q, double t, const SymbolPath* path = nullptr, int n_steps = 0) const;
  Potential symbol_local_at(double q, double t) const;

  ExpectedPressureEstimate pressure(double q, double t) const;

 private:
  FiberFamily family_;
  BaseProcess process_;
  Potential phi_;
  MonteCarlo mc_;
  std::optional<std::vector<double>> local_;
  ExpectedPressureEstimate base_pressure_;
};

/// Throws kNormalization if |E P(phi)| exceeds 3 sigma (1e-9 when exact).
TemperatureValue temperature(const NormalizedPotential& phi, double q, const TemperatureOptions& options = {});
TemperatureValue temperature(const FiberFamily& family, const BaseProcess& process, const Potential& phi, double q,
                             const TemperatureOptions& options = {});

struct TemperatureCurve {
  std::vector<double> q;
  std::vector<double> value;
  std::vector<double> derivative;        // central difference
  std::vector<double> derivative_error;
  std::vector<TemperatureValue> roots;
  double tolerance = 0.0;
  bool exact = false;
  std::string base;
};

TemperatureCurve temperature_curve(const FiberFamily& family, const BaseProcess& process, const Potential& phi,
                                   const std::vector<double>& q_grid, const TemperatureOptions& options = {});

enum class DerivativeMethod { kFiniteDifference, kGibbsRatio };

struct DerivativeEstimate {
  double value = 0.0;
  double error = 0.0;  // one-sigma-like error bar
  DerivativeMethod method = DerivativeMethod::kFiniteDifference;
};

/// Central difference (T(q+d) - T(q-d)) / 2d; error from the d vs 2d
/// difference plus root tolerance.
DerivativeEstimate temperature_derivative_fd(const NormalizedPotential& phi, double q,
                                             const TemperatureOptions& options = {});

struct RatioOptions {
  int depth = 14;
  int n_samples = 64;
  std::uint64_t seed = 7;
};

/// T'(q) = int (phi - P) dmu_q / int log|T'| dmu_q with mu_q the Gibbs
/// measure of phi_{q,T(q)}, integrated over depth-n cylinders.
DerivativeEstimate temperature_derivative_ratio(const NormalizedPotential& phi, double q,
                                                const TemperatureOptions& options = {},
                                                const RatioOptions& ratio = {});

struct DerivativeCrossCheck {
  DerivativeEstimate finite_difference;
  DerivativeEstimate ratio;
  bool agree = false;        // within 3 combined sigma
  bool flagged = false;      // disagreement beyond 5 combined sigma
};

DerivativeCrossCheck temperature_derivative(const NormalizedPotential& phi, double q,
                                            const TemperatureOptions& options = {}, const RatioOptions& ratio = {});

struct SpectrumPoint {
  double q = 0.0;
  double alpha = 0.0;
  double g = 0.0;
};

struct SpectrumResult {
  std::vector<SpectrumPoint> points;  // distinct alphas, decreasing in alpha with q increasing
  std::string derivative_method = "central-difference";
  bool convex = true;
  double max_convexity_excess = 0.0;
  bool concave = true;
  double max_concavity_excess = 0.0;
  std::optional<double> tangency;      // g(alpha(1)) - alpha(1)
  std::optional<double> peak_gap;      // max g - T(0)
  bool alpha_positive = true;
  bool bounds_ok = true;
};

/// (alpha, g) = (-T'(q), q alpha + T(q)) on the curve's grid. Throws
/// kNonConvex if T fails the midpoint test beyond 3x its tolerance.
SpectrumResult legendre_spectrum(const TemperatureCurve& curve);

}  // namespace randpress
