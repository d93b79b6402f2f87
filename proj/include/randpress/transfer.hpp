#pragma once

// Fiberwise Ruelle transfer operator
//
//   (L_x g)(w) = sum_{z in T_x^{-1}(w)} g(z) exp(phi_x(z)),
//
// on grid functions for interval fibers and as exact inverse-branch tree
// sums at an anchor point for any family. Iterated products are carried with
// a separate log scale so L^n 1 never overflows.

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"
#include "randpress/potential.hpp"

namespace randpress {

inline constexpr int kDefaultGridSize = 2048;

class FiberFunction {
 public:
  enum class Support { kUniformGrid, kTreeAnchors };

  static FiberFunction constant(int grid_size, double value);
  static FiberFunction sample(int grid_size, const std::function<double(double)>& f);
  static FiberFunction anchors(std::vector<FiberPoint> points, std::vector<double> values);

  Support support() const { return support_; }
  int size() const { return static_cast<int>(values_.size()); }
  double node(int i) const { return static_cast<double>(i) / (size() - 1); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  const std::vector<FiberPoint>& anchor_points() const { return anchors_; }
  /// Actual function value is values()[i] * exp(log_scale()).
  double log_scale() const { return log_scale_; }
  void set_log_scale(double s) { log_scale_ = s; }

  /// Piecewise-linear interpolation clamped to [0,1], without the log scale.
  double interpolate(double y) const;
  /// Scaled value at y.
  double operator()(double y) const;
  /// Max entry rescaled to 1, the factor moved into log_scale.
  void renormalize();
  double max_value() const;

  FiberFunction pointwise(const FiberFunction& other, const std::function<double(double, double)>& op) const;

 private:
  Support support_ = Support::kUniformGrid;
  std::vector<double> values_;
  std::vector<FiberPoint> anchors_;
  double log_scale_ = 0.0;
};

/// One application of L_a on a grid function. `index` is the absolute
/// fiber index of the source fiber (used by per-step potential shifts).
FiberFunction apply_transfer(const FiberFamily& family, Symbol symbol, const Potential& potential,
                             const FiberFunction& g, std::int64_t index = 0);

/// L^n_x g0 along path symbols x_0..x_{n-1}.
FiberFunction iterate_transfer(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                               const FiberFunction& g0, int n);

/// log L^k_{x_j} 1(anchor), anchor in fiber x_{j+k}, summed exactly over the
/// k-fold inverse-branch tree.
double log_tree_sum(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                    std::int64_t start, int depth, FiberPoint anchor);

/// Default anchor: 1/2 for interval fibers, the largest-modulus fixed point of
/// the given quadratic map otherwise.
FiberPoint default_anchor(const FiberFamily& family, Symbol symbol);

struct LambdaOptions {
  double tol = 1e-10;
  int max_depth = 0;                 // 0: largest depth with <= 2^20 leaves
  std::optional<FiberPoint> anchor;  // default_anchor per fiber otherwise
  /// Evaluate at max_depth only and never report non-convergence; the
  /// residual then compares against half that depth. For families whose
  /// ratio settles too slowly for the doubling test.
  bool fixed_depth = false;
};

struct LambdaTrace {
  std::vector<double> lambda;  // lambda-hat at x_0..x_{n-1}
  std::vector<int> depth;      // depth at which each estimate settled
  bool converged = true;
  double residual = 0.0;       // worst last relative ratio change
  std::int64_t first_failure = -1;
};

/// lambda-hat_{x_j} = L^k_{x_j} 1(y) / L^{k-1}_{x_{j+1}} 1(y), with the depth k
/// doubling until the ratio changes by less than tol (relative).
LambdaTrace lambda_trace(const FiberFamily& family, const SymbolPath& path, const Potential& potential, int n,
                         const LambdaOptions& options = {});

/// Integral of a grid function against the conformal measure nu_x,
/// nu_x(F) ~ sum L^k F / sum L^k 1 over the grid of fiber x_k.
double conformal_integral(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                          const FiberFunction& f, int depth = 40);

struct DensityOptions {
  int grid_size = kDefaultGridSize;
  int nu_depth = 40;
  LambdaOptions lambda;
};

/// q-hat_x = (1/(n_back+1)) sum_{k=0}^{n_back} L~^k_{x_{-k}} 1, normalized so
/// that nu_x(q-hat) = 1. L~ divides by lambda-hat.
FiberFunction invariant_density(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                                int n_back, const DensityOptions& options = {});

struct CylinderMass {
  std::vector<int> word;  // branch index at fibers x_0..x_{n-1}
  double mass = 0.0;
};

struct CylinderMasses {
  std::vector<CylinderMass> cylinders;  // lexicographic in word
  bool approximate = false;
  double raw_sum = 1.0;                  // before renormalization (approximate case)
  double distortion_bound = 0.0;         // masses exact up to exp(+-bound)
};

/// nu_x of every depth-n cylinder. Exact for constant-derivative families;
/// otherwise S_n phi is evaluated at the pulled-back midpoint.
CylinderMasses conformal_cylinder_masses(const FiberFamily& family, const SymbolPath& path,
                                         const Potential& potential, int depth,
                                         std::int64_t max_cylinders = std::int64_t{1} << 22);

struct DistortionReport {
  double max_log_ratio = 0.0;
  double max_budget = 0.0;        // largest budget among the probe pairs
  double worst_excess = 0.0;      // max(log ratio - budget), <= 0 when respected
  std::optional<double> uniform_q;  // Q when the family is uniformly expanding
  bool violation = false;
};

/// Compares |log L^n 1(w1) - log L^n 1(w2)| against the distortion budget
/// rho^alpha sum_j H_{x_j} (gamma_{x_j}...gamma_{x_{n-1}})^-alpha, which is at
/// most Q rho^alpha for uniformly expanding families.
DistortionReport distortion_check(const FiberFamily& family, const SymbolPath& path, const Potential& potential,
                                  int n, const std::vector<std::pair<double, double>>& probes);

/// Q for the potential on this family (H0 from the potential's branch
/// Lipschitz constants, alpha = 1).
double holder_distortion_budget(const FiberFamily& family, const Potential& potential);

struct CorrelationOptions {
  int n_back = 24;
  DensityOptions density;
};

/// corr(n) = mu_x((f o T^n) g) - mu_{x_n}(f) mu_x(g) for n = 0..N, with
/// mu_{x_n} the pushforward of mu_x = q-hat nu_x.
std::vector<double> correlation_series(const FiberFamily& family, const SymbolPath& path,
                                       const Potential& potential, const FiberFunction& f, const FiberFunction& g,
                                       int max_lag, const CorrelationOptions& options = {});

}  // namespace randpress
