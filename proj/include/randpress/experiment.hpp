#pragma once
// Experiment runner behind the randpress CLI: config parsing and validation,
// dispatch to the library, and serialization of results (JSON summary plus
// CSV tables with 17 significant digits).
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "randpress/base.hpp"
#include "randpress/error.hpp"
#include "randpress/fibers.hpp"
#include "randpress/potential.hpp"

namespace randpress {

inline constexpr const char* kVersion = "0.1.0";

struct FamilySpec {
  std::string kind = "cantor";  // cantor | two_slope | doubling | mean_example | quadratic | affine
  double s1 = 2.0;
  double s2 = 4.0;
  int degree = 2;
  std::vector<std::complex<double>> c{0.0};
  std::vector<std::vector<std::pair<double, double>>> domains;
  std::optional<double> xi, alpha, h0;
};

struct ProcessSpec {
  std::string kind;  // iid | deterministic | periodic; empty: family default
  std::vector<double> probs;
  int symbol = 0;
  std::vector<int> word;
};

struct PotentialSpec {
  std::string kind = "geometric";  // geometric | branch_constant
  double t = 0.0;
  std::vector<std::vector<double>> values;
};

/// Numeric knobs; unset ones take the per-operation defaults.
struct Knobs {
  std::optional<int> n_steps, n_samples, depth, grid, max_depth, window, n_back, max_lag, n_max, excursion_steps,
      n_iter, tail_blocks, ratio_samples, workers;
  std::optional<double> tol_t, tol_lambda, threshold, h;
  std::optional<bool> exact, bowen;
  std::optional<std::vector<double>> t_grid, q_grid, probe_q;
};

struct ExperimentConfig {
  std::string op;
  FamilySpec family;
  ProcessSpec process;
  PotentialSpec potential;
  Knobs knobs;
  std::uint64_t seed = 1;
  std::string out;
  std::string source;  // original text, hashed into the provenance block
};

/// Parses the structured key-value (YAML) config. Unknown keys and bad
/// values are collected and reported together as one validation error.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

FiberFamily build_family(const FamilySpec& spec);
BaseProcess build_process(const ProcessSpec& spec, const FiberFamily& family);
Potential build_potential(const PotentialSpec& spec);

struct CsvTable {
  std::string name;  // file name without extension
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_real(double v);

struct ResultBundle {
  nlohmann::json summary;
  std::vector<CsvTable> tables;
};

ResultBundle run_experiment(const ExperimentConfig& config);
nlohmann::json describe(const ExperimentConfig& config);

/// Writes summary.json and <name>.csv files into dir (created if missing).
void write_bundle(const ResultBundle& bundle, const std::string& dir);
std::string to_csv(const CsvTable& table);

nlohmann::json error_json(const Error& e);

/// 64-bit FNV-1a, hex encoded.
std::string content_hash(const std::string& text);

}  // namespace randpress
