#pragma once

// Fiber map families. Interval families are full-branch: every branch maps
// its domain monotonically onto [0,1]. Quadratic families are z^d + c_a on
// the complex plane, handled only through inverse branches.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "randpress/base.hpp"

namespace randpress {

using FiberPoint = std::complex<double>;

/// One monotone branch of an interval map, onto [0,1].
struct Branch {
  double lo = 0.0;
  double hi = 1.0;
  bool affine = true;
  double slope = 1.0;      // affine: f(z) = slope * z + intercept
  double intercept = 0.0;
  std::function<double(double)> map;         // smooth branches
  std::function<double(double)> derivative;
  std::function<double(double)> inverse;
  double min_abs_derivative = 1.0;
  double max_abs_derivative = 1.0;
  double log_derivative_lipschitz = 0.0;     // sup |f''/f'| on the domain

  static Branch affine_onto(double lo, double hi, bool increasing = true);
  static Branch smooth(double lo, double hi, std::function<double(double)> map,
                       std::function<double(double)> derivative, std::function<double(double)> inverse,
                       double min_abs_derivative, double max_abs_derivative, double log_derivative_lipschitz);

  double forward(double z) const { return affine ? slope * z + intercept : map(z); }
  double deriv(double z) const { return affine ? slope : derivative(z); }
  double preimage(double w) const { return affine ? (w - intercept) / slope : inverse(w); }
  bool contains(double z) const { return z >= lo && z <= hi; }
};

enum class FamilyKind { kPiecewiseAffineFull, kTwoSlopeDeterministic, kPiecewiseSmoothInterval, kQuadraticRandom };

struct FiberGeometry {
  double xi = 1.0;     // inverse-branch ball radius
  double alpha = 1.0;  // Hoelder exponent
  double h0 = 0.0;     // Hoelder bound of the potential in use
};

class FiberFamily {
 public:
  FamilyKind kind = FamilyKind::kPiecewiseAffineFull;
  std::string name;
  std::vector<std::vector<Branch>> branches;  // interval kinds, per symbol
  int degree_d = 2;                           // quadratic
  std::vector<std::complex<double>> c;        // quadratic, per symbol
  FiberGeometry geometry;

  int num_symbols() const;
  int degree(Symbol symbol) const;
  int max_degree() const;
  bool is_interval() const { return kind != FamilyKind::kQuadraticRandom; }
  /// Every branch has constant |T'| (affine kinds).
  bool has_constant_derivatives() const;
  /// 1 for interval fibers, 2 for complex ones.
  int ambient_dimension() const { return is_interval() ? 1 : 2; }

  void check_symbol(Symbol symbol) const;
  /// Throws kConfiguration when branch data break the family invariants.
  void validate() const;
};

struct Preimage {
  FiberPoint point;
  double log_deriv = 0.0;  // log|T'(point)|
  int branch = 0;
};

using PreimageSet = std::vector<Preimage>;

// Built-in families.
FiberFamily affine_full_family(const std::vector<std::vector<std::pair<double, double>>>& domains,
                               std::string name = "affine");
/// Random Cantor family: 3x mod 1 on [0,1/3]u[2/3,1] and 4x mod 1 on
/// [0,1/4]u[3/4,1].
FiberFamily cantor_family();
/// Single map with branches [0,1/s1] and [1-1/s2,1] of slopes s1, s2.
FiberFamily two_slope_family(double s1, double s2);
FiberFamily doubling_family();
/// f0 = x/2 + 15x^2/2 on [0,1/3], 8x-7 on [7/8,1]; f1 = 8x mod 1 on
/// [0,1/8]u[7/8,1]. Expanding only in the mean.
FiberFamily mean_example_family();
/// z^d + c_a, one symbol per parameter.
FiberFamily quadratic_family(int d, std::vector<std::complex<double>> c);

PreimageSet inverse_images(const FiberFamily& family, Symbol symbol, FiberPoint w);
FiberPoint apply_map(const FiberFamily& family, Symbol symbol, FiberPoint z);
/// log|T'_a(z)| for a point inside the repeller domain.
double log_abs_derivative(const FiberFamily& family, Symbol symbol, FiberPoint z);

/// gamma_a: infimum of |T'| over the symbol's branches (interval) or the
/// annulus bound d*eps^(d-1) (quadratic).
double expansion_floor(const FiberFamily& family, Symbol symbol);
double min_expansion_floor(const FiberFamily& family);

/// Q = H0 gamma^-alpha / (1 - gamma^-alpha) from the family geometry and the
/// smallest expansion floor. Throws kNotUniformlyExpanding if some floor <= 1.
double holder_distortion_budget(const FiberFamily& family);
double holder_distortion_budget(double h0, double alpha, double gamma_star);

/// Sufficient admissibility radius delta(d) for |c| of z^d + c.
double quadratic_delta_bound(int d);
/// Largest eps with eps - eps^d = delta; the Julia fibers live in |z| >= eps.
double quadratic_annulus_radius(int d, double delta);

struct Admissibility {
  bool ok = true;
  std::vector<std::string> messages;
};
Admissibility check_admissibility(const FiberFamily& family);

}  // namespace randpress
