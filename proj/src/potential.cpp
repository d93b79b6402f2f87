#include "randpress/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "randpress/error.hpp"

namespace randpress {

double PressureShift::operator()(std::int64_t index, Symbol symbol) const {
  if (per_step) return per_step(index, symbol);
  if (per_symbol.empty()) return 0.0;
  if (symbol < 0 || static_cast<std::size_t>(symbol) >= per_symbol.size()) {
    throw Error(ErrorCode::kDomain, "pressure shift has no value for symbol " + std::to_string(symbol));
  }
  return per_symbol[static_cast<std::size_t>(symbol)];
}

Potential Potential::geometric(double t) {
  Potential p;
  p.kind_ = PotentialKind::kGeometricT;
  p.t_ = t;
  return p;
}

Potential Potential::branch_constant(std::vector<std::vector<double>> values) {
  Potential p;
  p.kind_ = PotentialKind::kBranchConstant;
  p.values_ = std::move(values);
  return p;
}

Potential Potential::shifted(Potential base, PressureShift shift) {
  Potential p;
  p.kind_ = PotentialKind::kShifted;
  p.base_ = std::make_shared<const Potential>(std::move(base));
  p.shift_ = std::move(shift);
  return p;
}

Potential Potential::multifractal(Potential base, double q, double t, PressureShift shift) {
  Potential p;
  p.kind_ = PotentialKind::kMultifractalQT;
  p.base_ = std::make_shared<const Potential>(std::move(base));
  p.q_ = q;
  p.t_ = t;
  p.shift_ = std::move(shift);
  return p;
}

double Potential::value(Symbol symbol, int branch, double log_deriv, std::int64_t index) const {
  switch (kind_) {
    case PotentialKind::kGeometricT: return -t_ * log_deriv;
    case PotentialKind::kBranchConstant: {
      const auto s = static_cast<std::size_t>(symbol);
      const auto b = static_cast<std::size_t>(branch);
      if (s >= values_.size() || b >= values_[s].size()) {
        throw Error(ErrorCode::kDomain, "branch-constant potential has no value for symbol " +
                                            std::to_string(symbol) + " branch " + std::to_string(branch));
      }
      return values_[s][b];
    }
    case PotentialKind::kShifted:
      return base_->value(symbol, branch, log_deriv, index) - shift_(index, symbol);
    case PotentialKind::kMultifractalQT:
      return q_ * (base_->value(symbol, branch, log_deriv, index) - shift_(index, symbol)) - t_ * log_deriv;
  }
  return 0.0;
}

bool Potential::symbol_local() const {
  switch (kind_) {
    case PotentialKind::kGeometricT:
    case PotentialKind::kBranchConstant: return true;
    case PotentialKind::kShifted:
    case PotentialKind::kMultifractalQT: return shift_.symbol_local() && base_->symbol_local();
  }
  return true;
}

double Potential::holder_constant(const FiberFamily& family, Symbol symbol) const {
  double lip = 0.0;
  if (family.is_interval()) {
    for (const Branch& b : family.branches[static_cast<std::size_t>(symbol)]) {
      lip = std::max(lip, b.log_derivative_lipschitz);
    }
  } else {
    // log|d z^(d-1)| has gradient (d-1)/|z|, and the fibers stay in |z| >= eps.
    double delta = 0.0;
    for (const auto& ca : family.c) delta = std::max(delta, std::abs(ca));
    lip = (family.degree_d - 1) / quadratic_annulus_radius(family.degree_d, delta);
  }
  switch (kind_) {
    case PotentialKind::kGeometricT: return std::abs(t_) * lip;
    case PotentialKind::kBranchConstant: return 0.0;
    case PotentialKind::kShifted: return base_->holder_constant(family, symbol);
    case PotentialKind::kMultifractalQT:
      return std::abs(q_) * base_->holder_constant(family, symbol) + std::abs(t_) * lip;
  }
  return 0.0;
}

std::string Potential::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case PotentialKind::kGeometricT: os << "geometric(t=" << t_ << ")"; break;
    case PotentialKind::kBranchConstant: os << "branch_constant"; break;
    case PotentialKind::kShifted: os << "shifted(" << base_->describe() << ")"; break;
    case PotentialKind::kMultifractalQT:
      os << "multifractal(" << base_->describe() << ", q=" << q_ << ", t=" << t_ << ")";
      break;
  }
  return os.str();
}

}  // namespace randpress
