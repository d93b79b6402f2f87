#include "randpress/fibers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "randpress/error.hpp"

namespace randpress {

Branch Branch::affine_onto(double lo, double hi, bool increasing) {
  if (!(hi > lo)) throw Error(ErrorCode::kConfiguration, "affine branch: empty domain");
  Branch b;
  b.lo = lo;
  b.hi = hi;
  b.affine = true;
  const double width = hi - lo;
  b.slope = increasing ? 1.0 / width : -1.0 / width;
  b.intercept = increasing ? -lo / width : hi / width;
  b.min_abs_derivative = b.max_abs_derivative = 1.0 / width;
  b.log_derivative_lipschitz = 0.0;
  return b;
}

Branch Branch::smooth(double lo, double hi, std::function<double(double)> map,
                      std::function<double(double)> derivative, std::function<double(double)> inverse,
                      double min_abs_derivative, double max_abs_derivative, double log_derivative_lipschitz) {
  Branch b;
  b.lo = lo;
  b.hi = hi;
  b.affine = false;
  b.map = std::move(map);
  b.derivative = std::move(derivative);
  b.inverse = std::move(inverse);
  b.min_abs_derivative = min_abs_derivative;
  b.max_abs_derivative = max_abs_derivative;
  b.log_derivative_lipschitz = log_derivative_lipschitz;
  return b;
}

int FiberFamily::num_symbols() const {
  return is_interval() ? static_cast<int>(branches.size()) : static_cast<int>(c.size());
}

int FiberFamily::degree(Symbol symbol) const {
  check_symbol(symbol);
  return is_interval() ? static_cast<int>(branches[static_cast<std::size_t>(symbol)].size()) : degree_d;
}

int FiberFamily::max_degree() const {
  int d = 0;
  for (Symbol a = 0; a < num_symbols(); ++a) d = std::max(d, degree(a));
  return d;
}

bool FiberFamily::has_constant_derivatives() const {
  if (!is_interval()) return false;
  for (const auto& bs : branches) {
    for (const auto& b : bs) {
      if (!b.affine) return false;
    }
  }
  return true;
}

void FiberFamily::check_symbol(Symbol symbol) const {
  if (symbol < 0 || symbol >= num_symbols()) {
    throw Error(ErrorCode::kDomain, "symbol " + std::to_string(symbol) + " not in family '" + name + "'");
  }
}

void FiberFamily::validate() const {
  if (num_symbols() == 0) throw Error(ErrorCode::kConfiguration, "family '" + name + "' has no symbols");
  if (!is_interval()) {
    if (degree_d < 2) throw Error(ErrorCode::kConfiguration, "quadratic family: degree must be >= 2");
    return;
  }
  for (std::size_t a = 0; a < branches.size(); ++a) {
    auto bs = branches[a];
    if (bs.empty()) throw Error(ErrorCode::kConfiguration, "symbol " + std::to_string(a) + " has no branches");
    std::sort(bs.begin(), bs.end(), [](const Branch& x, const Branch& y) { return x.lo < y.lo; });
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const Branch& b = bs[i];
      if (b.lo < 0.0 || b.hi > 1.0 || !(b.hi > b.lo)) {
        throw Error(ErrorCode::kConfiguration, "branch domain outside [0,1] for symbol " + std::to_string(a));
      }
      // Domains may touch but not overlap.
      if (i > 0 && b.lo < bs[i - 1].hi - 1e-15) {
        throw Error(ErrorCode::kConfiguration, "overlapping branch domains for symbol " + std::to_string(a));
      }
      const double f_lo = b.forward(b.lo);
      const double f_hi = b.forward(b.hi);
      if (std::abs(std::min(f_lo, f_hi)) > 1e-12 || std::abs(std::max(f_lo, f_hi) - 1.0) > 1e-12) {
        throw Error(ErrorCode::kConfiguration, "branch of symbol " + std::to_string(a) + " is not onto [0,1]");
      }
    }
  }
}

FiberFamily affine_full_family(const std::vector<std::vector<std::pair<double, double>>>& domains,
                               std::string name) {
  FiberFamily f;
  f.kind = FamilyKind::kPiecewiseAffineFull;
  f.name = std::move(name);
  for (const auto& sym : domains) {
    std::vector<Branch> bs;
    for (auto [lo, hi] : sym) bs.push_back(Branch::affine_onto(lo, hi));
    f.branches.push_back(std::move(bs));
  }
  f.validate();
  return f;
}

FiberFamily cantor_family() {
  return affine_full_family({{{0.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0}}, {{0.0, 0.25}, {0.75, 1.0}}}, "cantor");
}

FiberFamily two_slope_family(double s1, double s2) {
  if (!(s1 > 1.0) || !(s2 > 1.0)) throw Error(ErrorCode::kConfiguration, "two-slope family: slopes must exceed 1");
  if (1.0 / s1 + 1.0 / s2 > 1.0 + 1e-15) {
    throw Error(ErrorCode::kConfiguration, "two-slope family: branch widths 1/s1 + 1/s2 exceed 1");
  }
  FiberFamily f = affine_full_family({{{0.0, 1.0 / s1}, {1.0 - 1.0 / s2, 1.0}}}, "two-slope");
  f.kind = FamilyKind::kTwoSlopeDeterministic;
  return f;
}

FiberFamily doubling_family() {
  FiberFamily f = two_slope_family(2.0, 2.0);
  f.name = "doubling";
  return f;
}

FiberFamily mean_example_family() {
  FiberFamily f;
  f.kind = FamilyKind::kPiecewiseSmoothInterval;
  f.name = "mean-example";
  // x/2 + 15x^2/2 maps [0,1/3] onto [0,1]; f' = 1/2 + 15x in [1/2, 11/2],
  // |f''/f'| = 15/(1/2 + 15x) <= 30.
  Branch quad = Branch::smooth(
      0.0, 1.0 / 3.0, [](double x) { return 0.5 * x + 7.5 * x * x; },
      [](double x) { return 0.5 + 15.0 * x; },
      [](double w) {
        // Positive root of 15x^2 + x - 2w = 0, written to avoid cancellation.
        const double disc = std::sqrt(1.0 + 120.0 * w);
        return 4.0 * w / (1.0 + disc);
      },
      0.5, 5.5, 30.0);
  f.branches.push_back({quad, Branch::affine_onto(7.0 / 8.0, 1.0)});
  f.branches.push_back({Branch::affine_onto(0.0, 1.0 / 8.0), Branch::affine_onto(7.0 / 8.0, 1.0)});
  f.validate();
  return f;
}

FiberFamily quadratic_family(int d, std::vector<std::complex<double>> c) {
  FiberFamily f;
  f.kind = FamilyKind::kQuadraticRandom;
  f.name = "quadratic";
  f.degree_d = d;
  f.c = std::move(c);
  f.validate();
  return f;
}

namespace {

void interval_preimages(const FiberFamily& family, Symbol symbol, double w, PreimageSet& out) {
  if (!(w >= -1e-15 && w <= 1.0 + 1e-15)) {
    std::ostringstream os;
    os << "interval target " << w << " outside [0,1]";
    throw Error(ErrorCode::kDomain, os.str());
  }
  w = std::clamp(w, 0.0, 1.0);
  const auto& bs = family.branches[static_cast<std::size_t>(symbol)];
  out.clear();
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const double z = std::clamp(bs[i].preimage(w), bs[i].lo, bs[i].hi);
    out.push_back({FiberPoint(z, 0.0), std::log(std::abs(bs[i].deriv(z))), static_cast<int>(i)});
  }
}

void complex_preimages(const FiberFamily& family, Symbol symbol, FiberPoint w, PreimageSet& out) {
  const int d = family.degree_d;
  const std::complex<double> c = family.c[static_cast<std::size_t>(symbol)];
  const std::complex<double> u = w - c;
  if (std::abs(u) < 1e-14 * std::max(1.0, std::abs(c))) {
    throw Error(ErrorCode::kSingularity, "target coincides with the critical value c");
  }
  const std::complex<double> root = std::pow(u, 1.0 / d);
  out.clear();
  for (int k = 0; k < d; ++k) {
    const std::complex<double> z = root * std::polar(1.0, 2.0 * std::numbers::pi * k / d);
    out.push_back({z, std::log(static_cast<double>(d)) + (d - 1) * std::log(std::abs(z)), k});
  }
}

}  // namespace

PreimageSet inverse_images(const FiberFamily& family, Symbol symbol, FiberPoint w) {
  family.check_symbol(symbol);
  PreimageSet out;
  if (family.is_interval()) {
    if (w.imag() != 0.0) throw Error(ErrorCode::kDomain, "interval family given a complex target");
    interval_preimages(family, symbol, w.real(), out);
  } else {
    complex_preimages(family, symbol, w, out);
  }
  return out;
}

FiberPoint apply_map(const FiberFamily& family, Symbol symbol, FiberPoint z) {
  family.check_symbol(symbol);
  if (!family.is_interval()) {
    return std::pow(z, family.degree_d) + family.c[static_cast<std::size_t>(symbol)];
  }
  if (z.imag() != 0.0) throw Error(ErrorCode::kDomain, "interval family given a complex point");
  for (const Branch& b : family.branches[static_cast<std::size_t>(symbol)]) {
    if (b.contains(z.real())) return {std::clamp(b.forward(z.real()), 0.0, 1.0), 0.0};
  }
  std::ostringstream os;
  os << "point " << z.real() << " lies in a gap between branch domains";
  throw Error(ErrorCode::kOutsideRepeller, os.str());
}

double log_abs_derivative(const FiberFamily& family, Symbol symbol, FiberPoint z) {
  family.check_symbol(symbol);
  if (!family.is_interval()) {
    return std::log(static_cast<double>(family.degree_d)) + (family.degree_d - 1) * std::log(std::abs(z));
  }
  for (const Branch& b : family.branches[static_cast<std::size_t>(symbol)]) {
    if (b.contains(z.real())) return std::log(std::abs(b.deriv(z.real())));
  }
  throw Error(ErrorCode::kOutsideRepeller, "point lies in a gap between branch domains");
}

double quadratic_delta_bound(int d) {
  const double eps_star = std::pow(1.0 / d, 1.0 / (d - 1));
  return eps_star - std::pow(eps_star, d);
}

double quadratic_annulus_radius(int d, double delta) {
  // eps - eps^d is decreasing on [eps*, 1] from delta(d) down to 0.
  double lo = std::pow(1.0 / d, 1.0 / (d - 1));
  double hi = 1.0;
  if (delta <= 0.0) return 1.0;
  if (delta >= lo - std::pow(lo, d)) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - std::pow(mid, d) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double expansion_floor(const FiberFamily& family, Symbol symbol) {
  family.check_symbol(symbol);
  if (!family.is_interval()) {
    double delta = 0.0;
    for (const auto& ca : family.c) delta = std::max(delta, std::abs(ca));
    const double eps = quadratic_annulus_radius(family.degree_d, delta);
    return family.degree_d * std::pow(eps, family.degree_d - 1);
  }
  double g = std::numeric_limits<double>::infinity();
  for (const Branch& b : family.branches[static_cast<std::size_t>(symbol)]) g = std::min(g, b.min_abs_derivative);
  return g;
}

double min_expansion_floor(const FiberFamily& family) {
  double g = std::numeric_limits<double>::infinity();
  for (Symbol a = 0; a < family.num_symbols(); ++a) g = std::min(g, expansion_floor(family, a));
  return g;
}

double holder_distortion_budget(double h0, double alpha, double gamma_star) {
  if (!(gamma_star > 1.0)) {
    throw Error(ErrorCode::kNotUniformlyExpanding, "distortion budget needs every expansion floor > 1");
  }
  if (h0 == 0.0) return 0.0;
  const double r = std::pow(gamma_star, -alpha);
  return h0 * r / (1.0 - r);
}

double holder_distortion_budget(const FiberFamily& family) {
  return holder_distortion_budget(family.geometry.h0, family.geometry.alpha, min_expansion_floor(family));
}

Admissibility check_admissibility(const FiberFamily& family) {
  Admissibility a;
  if (family.kind == FamilyKind::kQuadraticRandom) {
    double delta = 0.0;
    for (const auto& ca : family.c) delta = std::max(delta, std::abs(ca));
    const double bound = quadratic_delta_bound(family.degree_d);
    if (!(delta < bound)) {
      a.ok = false;
      std::ostringstream os;
      os << "max |c| = " << delta << " is not below delta(" << family.degree_d << ") = " << bound;
      a.messages.push_back(os.str());
    }
  }
  return a;
}

}  // namespace randpress
