#pragma once
// Random polynomial Julia sets z -> z^d + c_a. Pressure of -t log|f'| comes
// from the full inverse-branch tree at an anchor point, carried in log space.
#include <complex>
#include <cstdint>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"
#include "randpress/pressure.hpp"

namespace randpress {

struct InverseTree {
  FiberPoint anchor;                       // in fiber x_n
  int depth = 0;
  std::vector<Symbol> word;                // x_0 .. x_{n-1}
  std::vector<double> log_derivative_sums; // S_n log|f'| per leaf
  std::vector<FiberPoint> leaves;          // only when requested
  int reseeds = 0;                         // anchor rotations after a singular hit
};

/// d^n preimages of the anchor under f_{x_{n-1}} o ... o f_{x_0}. The anchor
/// is the largest-modulus fixed point of the symbol-0 map; if the tree runs
/// into the critical value it is rotated and the tree rebuilt.
InverseTree build_inverse_tree(const FiberFamily& family, const SymbolPath& path, int depth,
                               bool keep_leaves = false);

/// log sum over leaves of exp(-t S_n log|f'|).
double tree_log_sum(const InverseTree& tree, double t);

struct TreeCheck {
  std::size_t leaves = 0;
  double max_relative_error = 0.0;  // forward images of leaves vs the anchor
  double min_separation = 0.0;      // smallest distance between two leaves
  bool ok = true;
};

/// Needs a tree built with keep_leaves.
TreeCheck verify_inverse_tree(const FiberFamily& family, const InverseTree& tree);

struct JuliaOptions {
  int depth = 18;
  int samples = 32;
  std::uint64_t seed = 1;
  int workers = 0;
  double tol_t = 1e-3;
  double t_hi = 2.0;
};

/// Per-sample leaf data kept once so that the pressure at any t is cheap.
class JuliaEnsemble {
 public:
  JuliaEnsemble(const FiberFamily& family, const BaseProcess& process, const JuliaOptions& options);
  ExpectedPressureEstimate pressure(double t) const;
  int depth() const { return depth_; }
  int samples() const { return static_cast<int>(sums_.size()); }
  int reseeds() const { return reseeds_; }

 private:
  int depth_ = 0;
  int workers_ = 0;
  std::vector<std::vector<double>> sums_;
  int reseeds_ = 0;
};

/// Throws kHypothesisViolation unless every |c_a| is below delta(d).
void require_julia_admissible(const FiberFamily& family);

ExpectedPressureEstimate julia_pressure(const FiberFamily& family, const BaseProcess& process, double t,
                                        const JuliaOptions& options = {});
ExpectedPressureEstimate julia_pressure(int d, const std::vector<std::complex<double>>& c,
                                        const BaseProcess& process, double t, const JuliaOptions& options = {});

struct JuliaBowen {
  double h = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int depth = 0;
  int samples = 0;
  double tolerance = 0.0;
  bool tolerance_limited = false;
  int evaluations = 0;
};

JuliaBowen julia_bowen(const FiberFamily& family, const BaseProcess& process, const JuliaOptions& options = {});
JuliaBowen julia_bowen(const JuliaEnsemble& ensemble, const JuliaOptions& options = {});
JuliaBowen julia_bowen(int d, const std::vector<std::complex<double>>& c, const BaseProcess& process,
                       const JuliaOptions& options = {});

}  // namespace randpress
