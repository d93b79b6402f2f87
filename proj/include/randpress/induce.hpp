#pragma once
// Inducing for systems that expand only on average. A return set A is built
// over forward symbol windows from the per-symbol expansion floors, so that
// every return block from A to A has expansion product > 1. The induced map is
// the block composition and the induced potential is the Birkhoff sum of the
// original one along the block.
#include <cstdint>
#include <string>
#include <vector>

#include "randpress/base.hpp"
#include "randpress/fibers.hpp"
#include "randpress/potential.hpp"
#include "randpress/pressure.hpp"
#include "randpress/transfer.hpp"

namespace randpress {

enum class WindowStatus : std::int8_t { kReject = 0, kAccept = 1, kUndecided = 2 };

const char* window_status_name(WindowStatus s);

struct ExpandingSetSpec {
  int depth = 0;                     // window length W
  int alphabet = 0;
  std::vector<double> log_floors;    // log gamma_a
  double mean_log_floor = 0.0;       // integral of log gamma against m
  /// Status of every length-W window, base-alphabet code with x_0 most
  /// significant. Undecided windows are treated as outside A.
  std::vector<WindowStatus> table;
  /// Accepted windows whose first return is expanding under every
  /// continuation (they stay accepted one refinement level further).
  std::vector<bool> certified;
  int level = 0;                     // refinement level the table comes from
  bool stable = false;               // refinement reached a fixed point
  double measure = 0.0;              // m(A), exact for the supported processes
  double certified_measure = 0.0;
  std::int64_t accepted = 0;
  std::int64_t undecided = 0;

  std::uint64_t code(const std::vector<Symbol>& window) const;
  std::vector<Symbol> window(std::uint64_t code) const;
  bool accepts(const SymbolPath& path, std::int64_t i) const;
};

/// Runs the refinement A_{k+1} = {x in A_k : gamma_{A_k,x} > 1} on windows of
/// length <= W with three-valued statuses (a window is undecided when its
/// verdict depends on symbols past the window). Stops at a fixed point or when
/// nothing is accepted any more, and keeps the level whose accepted windows
/// are most often certified.
ExpandingSetSpec find_expanding_set(const FiberFamily& family, const BaseProcess& process, int depth);

/// Probability under the process's invariant law that x starts with `window`.
double window_probability(const BaseProcess& process, const std::vector<Symbol>& window);

struct BlockCheck {
  std::int64_t blocks = 0;          // induced blocks closed inside 2W symbols
  std::int64_t extended = 0;        // first A-visit had product <= 1, block ran on
  std::int64_t beyond_window = 0;   // continuations with no block end inside 2W symbols
  double min_log_product = 0.0;
  bool ok = true;
};

/// Enumerates every accepted window followed by every continuation of length
/// W and checks the product along the induced block. `ok` also requires that
/// certified windows never need the extension rule.
BlockCheck exhaustive_block_check(const ExpandingSetSpec& set, std::int64_t max_sequences = std::int64_t{1} << 24);

struct InducedBlock {
  std::int64_t start = 0;           // path index of x_0 of the block
  std::vector<Symbol> word;
  int tau = 0;
  double log_expansion = 0.0;       // sum of log gamma over the block
  double expansion() const;
};

/// Consecutive blocks starting at the first A-visit at index >= 0. A block
/// ends at the first A-visit whose product over the block exceeds 1; from a
/// certified window that is the plain first return.
std::vector<InducedBlock> induced_path(const FiberFamily& family, const ExpandingSetSpec& set,
                                       const SymbolPath& path, int n_blocks);

/// Induced potential at a point z of the block's first fiber: the sum of phi
/// along the forward orbit z, T z, ..., T^{tau-1} z.
double induced_potential(const FiberFamily& family, const Potential& potential, const SymbolPath& path,
                         const InducedBlock& block, double z);

/// One application of the induced transfer operator on a grid function,
/// summing over all composed preimages of the block with weight exp(phi-bar).
FiberFunction apply_induced_transfer(const FiberFamily& family, const Potential& potential, const SymbolPath& path,
                                     const InducedBlock& block, const FiberFunction& g);

struct InducedOptions {
  int window = 8;
  int n_steps = 120;        // original time covered per sample (at least)
  int tail_blocks = 24;     // lookahead blocks for the telescoped estimate
  int n_samples = 48;
  std::uint64_t seed = 11;
  int workers = 0;
  int grid_size = 1024;
  LambdaOptions lambda{1e-6, 12, {}, true};
};

struct InducedConsistency {
  double t = 0.0;
  ExpectedPressureEstimate direct;
  ExpectedPressureEstimate induced;
  double difference = 0.0;
  double combined_error = 0.0;      // hypot of the two standard errors
  double paired_error = 0.0;        // standard error of per-sample differences
  double mean_tau = 0.0;
  double kac_product = 0.0;         // mean tau * m(A)
  bool agree = false;               // |difference| <= 3 combined (+1e-12)
};

/// Pressure per unit original time of -t log|T'|: directly from inverse
/// trees and through the induced system on the same sampled paths.
InducedConsistency induced_pressure_consistency(const FiberFamily& family, const BaseProcess& process,
                                                const ExpandingSetSpec& set, double t,
                                                const InducedOptions& options = {});

/// Induced-route pressure only, per unit original time.
ExpectedPressureEstimate induced_pressure(const FiberFamily& family, const BaseProcess& process,
                                          const ExpandingSetSpec& set, const Potential& potential,
                                          const InducedOptions& options = {});

/// Bowen root of E P(-t log|T'|) per unit original time, evaluated through
/// the induced system with common random numbers across t.
BowenResult induced_bowen(const FiberFamily& family, const BaseProcess& process, const ExpandingSetSpec& set,
                          const InducedOptions& options = {}, double tol_t = 2e-3);

struct MeanExampleBowen {
  BowenResult root;
  ExpandingSetSpec set;
  double bound = 0.52;
  bool within_bound = false;
};

/// Bowen root of the built-in mean-expanding example through the induced
/// system, i.i.d. (1/2, 1/2) base.
MeanExampleBowen mean_example_bowen(const InducedOptions& options = {}, double tol_t = 2e-3);

}  // namespace randpress
