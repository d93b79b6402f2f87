#pragma once

// Base dynamics: a symbol process standing in for the ergodic driver of the
// random system, realized two-sided orbits of it, and streaming statistics for
// Birkhoff averages.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace randpress {

using Symbol = int;

enum class ProcessKind { kIidFinite, kDeterministic, kPeriodicWord };

struct BaseProcess {
  ProcessKind kind = ProcessKind::kDeterministic;
  std::vector<Symbol> symbols;   // IID: 0..K-1
  std::vector<double> probs;     // IID only
  Symbol fixed = 0;              // Deterministic only
  std::vector<Symbol> word;      // PeriodicWord only
  std::string description;

  static BaseProcess iid(std::vector<double> probs, std::string description = {});
  static BaseProcess deterministic(Symbol symbol, std::string description = {});
  static BaseProcess periodic(std::vector<Symbol> word, std::string description = {});

  /// Number of distinct symbol ids the process can emit (max id + 1).
  int alphabet_size() const;

  /// Long-run frequency of each symbol id under the invariant law.
  std::vector<double> frequencies() const;

  /// Throws kConfiguration when the invariants do not hold.
  void validate() const;
};

/// Realized orbit of the base map. Symbols are addressed by signed index
/// (index i is x_i = theta^i(x)); every index is O(1)-computable from the
/// seed, so the nominal forward/backward lengths only bound materialization
/// and never change already emitted entries.
class SymbolPath {
 public:
  SymbolPath() = default;
  SymbolPath(std::shared_ptr<const BaseProcess> process, std::uint64_t seed,
             std::int64_t n_forward, std::int64_t n_backward, std::int64_t offset = 0);

  Symbol at(std::int64_t i) const;
  Symbol operator[](std::int64_t i) const { return at(i); }

  std::vector<Symbol> forward() const;
  std::vector<Symbol> backward() const;  // x_{-1}, ..., x_{-n_backward}

  std::int64_t n_forward() const { return n_forward_; }
  std::int64_t n_backward() const { return n_backward_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t offset() const { return offset_; }
  const BaseProcess& process() const { return *process_; }
  const std::shared_ptr<const BaseProcess>& process_ptr() const { return process_; }

  /// Same orbit, grown to at least the given lengths.
  SymbolPath extended(std::int64_t n_forward, std::int64_t n_backward) const;

  friend SymbolPath shift(const SymbolPath& path, std::int64_t k);

 private:
  std::shared_ptr<const BaseProcess> process_;
  std::uint64_t seed_ = 0;
  std::int64_t n_forward_ = 0;
  std::int64_t n_backward_ = 0;
  std::int64_t offset_ = 0;
};

SymbolPath sample_path(const BaseProcess& process, std::int64_t n_forward,
                       std::int64_t n_backward, std::uint64_t seed);

/// The path viewed from theta^k(x): index i of the result is index i+k of the
/// input.
SymbolPath shift(const SymbolPath& path, std::int64_t k);

/// A path starting at an m-distributed base point. Differs from sample_path
/// only for periodic words, whose phase is drawn uniformly from the seed.
SymbolPath draw_base_point(const BaseProcess& process, std::int64_t n_forward,
                           std::int64_t n_backward, std::uint64_t seed);

/// Seed for the i-th independent sample of an experiment seeded with `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0,1) addressed by (seed, stream, index).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct RunningStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double min = 0.0;
  double max = 0.0;

  void push(double x);
  void merge(const RunningStats& other);

  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stddev() const;
  double stderr_of_mean() const;
};

/// Single-pass mean/variance. Throws kNumeric naming the first non-finite
/// index.
RunningStats birkhoff_stats(std::span<const double> series);

}  // namespace randpress
