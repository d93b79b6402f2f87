#include "randpress/base.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "randpress/error.hpp"

namespace randpress {

namespace {

constexpr std::uint64_t kForwardStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kBackwardStream = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kPhaseStream = 0x8CB92BA72F3D8DD7ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(splitmix64(seed ^ stream) + splitmix64(index));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

BaseProcess BaseProcess::iid(std::vector<double> probs, std::string description) {
  BaseProcess p;
  p.kind = ProcessKind::kIidFinite;
  p.symbols.resize(probs.size());
  std::iota(p.symbols.begin(), p.symbols.end(), 0);
  p.probs = std::move(probs);
  p.description = std::move(description);
  p.validate();
  return p;
}

BaseProcess BaseProcess::deterministic(Symbol symbol, std::string description) {
  BaseProcess p;
  p.kind = ProcessKind::kDeterministic;
  p.fixed = symbol;
  p.description = std::move(description);
  p.validate();
  return p;
}

BaseProcess BaseProcess::periodic(std::vector<Symbol> word, std::string description) {
  BaseProcess p;
  p.kind = ProcessKind::kPeriodicWord;
  p.word = std::move(word);
  p.description = std::move(description);
  p.validate();
  return p;
}

int BaseProcess::alphabet_size() const {
  switch (kind) {
    case ProcessKind::kIidFinite: return static_cast<int>(probs.size());
    case ProcessKind::kDeterministic: return fixed + 1;
    case ProcessKind::kPeriodicWord: return *std::max_element(word.begin(), word.end()) + 1;
  }
  return 0;
}

std::vector<double> BaseProcess::frequencies() const {
  std::vector<double> f(static_cast<std::size_t>(alphabet_size()), 0.0);
  switch (kind) {
    case ProcessKind::kIidFinite: return probs;
    case ProcessKind::kDeterministic: f[static_cast<std::size_t>(fixed)] = 1.0; break;
    case ProcessKind::kPeriodicWord:
      for (Symbol s : word) f[static_cast<std::size_t>(s)] += 1.0 / static_cast<double>(word.size());
      break;
  }
  return f;
}

void BaseProcess::validate() const {
  switch (kind) {
    case ProcessKind::kIidFinite: {
      if (probs.empty()) throw Error(ErrorCode::kConfiguration, "iid process: empty symbol set");
      double sum = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
          throw Error(ErrorCode::kConfiguration,
                      "iid process: probability " + std::to_string(i) + " is negative or not finite");
        }
        sum += probs[i];
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw Error(ErrorCode::kConfiguration, "iid process: probabilities must sum to 1");
      }
      if (symbols.size() != probs.size()) {
        throw Error(ErrorCode::kConfiguration, "iid process: symbol ids must be 0..K-1");
      }
      break;
    }
    case ProcessKind::kDeterministic:
      if (fixed < 0) throw Error(ErrorCode::kConfiguration, "deterministic process: negative symbol id");
      break;
    case ProcessKind::kPeriodicWord:
      if (word.empty()) throw Error(ErrorCode::kConfiguration, "periodic process: empty word");
      for (Symbol s : word) {
        if (s < 0) throw Error(ErrorCode::kConfiguration, "periodic process: negative symbol id");
      }
      break;
  }
}

SymbolPath::SymbolPath(std::shared_ptr<const BaseProcess> process, std::uint64_t seed,
                       std::int64_t n_forward, std::int64_t n_backward, std::int64_t offset)
    : process_(std::move(process)),
      seed_(seed),
      n_forward_(n_forward),
      n_backward_(n_backward),
      offset_(offset) {}

Symbol SymbolPath::at(std::int64_t i) const {
  const BaseProcess& p = *process_;
  const std::int64_t j = i + offset_;
  switch (p.kind) {
    case ProcessKind::kDeterministic: return p.fixed;
    case ProcessKind::kPeriodicWord: {
      const auto n = static_cast<std::int64_t>(p.word.size());
      return p.word[static_cast<std::size_t>(((j % n) + n) % n)];
    }
    case ProcessKind::kIidFinite: {
      const double u = j >= 0 ? counter_uniform(seed_, kForwardStream, static_cast<std::uint64_t>(j))
                              : counter_uniform(seed_, kBackwardStream, static_cast<std::uint64_t>(-j - 1));
      double acc = 0.0;
      for (std::size_t a = 0; a + 1 < p.probs.size(); ++a) {
        acc += p.probs[a];
        if (u < acc) return static_cast<Symbol>(a);
      }
      // Skip trailing zero-probability symbols.
      for (std::size_t a = p.probs.size(); a-- > 0;) {
        if (p.probs[a] > 0.0) return static_cast<Symbol>(a);
      }
      return 0;
    }
  }
  return 0;
}

std::vector<Symbol> SymbolPath::forward() const {
  std::vector<Symbol> out(static_cast<std::size_t>(n_forward_));
  for (std::int64_t i = 0; i < n_forward_; ++i) out[static_cast<std::size_t>(i)] = at(i);
  return out;
}

std::vector<Symbol> SymbolPath::backward() const {
  std::vector<Symbol> out(static_cast<std::size_t>(n_backward_));
  for (std::int64_t k = 1; k <= n_backward_; ++k) out[static_cast<std::size_t>(k - 1)] = at(-k);
  return out;
}

SymbolPath SymbolPath::extended(std::int64_t n_forward, std::int64_t n_backward) const {
  SymbolPath p = *this;
  p.n_forward_ = std::max(n_forward_, n_forward);
  p.n_backward_ = std::max(n_backward_, n_backward);
  return p;
}

SymbolPath shift(const SymbolPath& path, std::int64_t k) {
  SymbolPath p = path;
  p.offset_ += k;
  p.n_forward_ = std::max<std::int64_t>(0, path.n_forward_ - k);
  p.n_backward_ = std::max<std::int64_t>(0, path.n_backward_ + k);
  return p;
}

SymbolPath sample_path(const BaseProcess& process, std::int64_t n_forward, std::int64_t n_backward,
                       std::uint64_t seed) {
  process.validate();
  if (n_forward < 1) throw Error(ErrorCode::kValidation, "sample_path: n_forward must be >= 1");
  if (n_backward < 0) throw Error(ErrorCode::kValidation, "sample_path: n_backward must be >= 0");
  return SymbolPath(std::make_shared<const BaseProcess>(process), seed, n_forward, n_backward);
}

SymbolPath draw_base_point(const BaseProcess& process, std::int64_t n_forward, std::int64_t n_backward,
                           std::uint64_t seed) {
  SymbolPath p = sample_path(process, n_forward, n_backward, seed);
  if (process.kind == ProcessKind::kPeriodicWord) {
    const auto n = static_cast<double>(process.word.size());
    const auto phase = static_cast<std::int64_t>(counter_uniform(seed, kPhaseStream, 0) * n);
    p = shift(p, phase).extended(n_forward, n_backward);
  }
  return p;
}

void RunningStats::push(double x) {
  if (count == 0) {
    min = max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const auto na = static_cast<double>(count);
  const auto nb = static_cast<double>(other.count);
  const double n = na + nb;
  const double delta = other.mean - mean;
  mean += delta * nb / n;
  m2 += other.m2 + delta * delta * na * nb / n;
  count += other.count;
  min = std::min(min, other.min);
  max = std::max(max, other.max);
}

double RunningStats::stddev() const { return std::sqrt(std::max(0.0, variance())); }

double RunningStats::stderr_of_mean() const {
  return count > 0 ? stddev() / std::sqrt(static_cast<double>(count)) : 0.0;
}

RunningStats birkhoff_stats(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::kValidation, "birkhoff_stats: empty series");
  RunningStats s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i])) {
      throw Error(ErrorCode::kNumeric, "birkhoff_stats: non-finite entry at index " + std::to_string(i),
                  {std::to_string(i)});
    }
    s.push(series[i]);
  }
  return s;
}

}  // namespace randpress
