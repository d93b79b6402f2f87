#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"

namespace randpress {

/// Fiberwise pressure values used to normalize a potential: either one
/// constant per symbol (symbol-local pressure) or a lookup by absolute fiber
/// index along a realized path.
struct PressureShift {
  std::vector<double> per_symbol;
  std::function<double(std::int64_t index, Symbol symbol)> per_step;

  static PressureShift zero() { return {}; }
  static PressureShift symbols(std::vector<double> values) { return {std::move(values), {}}; }

  double operator()(std::int64_t index, Symbol symbol) const;
  bool symbol_local() const { return !per_step; }
};

enum class PotentialKind { kGeometricT, kBranchConstant, kShifted, kMultifractalQT };

/// Hoelder potentials on the fibers. Every kind here is a function of
/// (symbol, branch, log|T'| at the point, fiber index), which is all the
/// transfer machinery passes in.
class Potential {
 public:
  /// -t log|T'|
  static Potential geometric(double t);
  /// One value per (symbol, branch).
  static Potential branch_constant(std::vector<std::vector<double>> values);
  /// base - shift
  static Potential shifted(Potential base, PressureShift shift);
  /// q (base - shift) - t log|T'|
  static Potential multifractal(Potential base, double q, double t, PressureShift shift);

  PotentialKind kind() const { return kind_; }
  double t() const { return t_; }
  double q() const { return q_; }
  const Potential* base() const { return base_.get(); }
  const PressureShift& shift() const { return shift_; }

  double value(Symbol symbol, int branch, double log_deriv, std::int64_t index) const;

  /// True when the fiber pressure can depend on the current symbol only
  /// (no per-step shift anywhere in the expression).
  bool symbol_local() const;

  /// Lipschitz constant (alpha = 1) of the potential along one branch of the
  /// given symbol.
  double holder_constant(const FiberFamily& family, Symbol symbol) const;

  std::string describe() const;

 private:
  PotentialKind kind_ = PotentialKind::kGeometricT;
  double t_ = 0.0;
  double q_ = 1.0;
  std::vector<std::vector<double>> values_;
  std::shared_ptr<const Potential> base_;
  PressureShift shift_;
};

}  // namespace randpress
