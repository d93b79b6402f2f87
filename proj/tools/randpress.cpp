#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "randpress/experiment.hpp"

namespace {

int fail(const randpress::Error& e) {
  std::cout << randpress::error_json(e).dump(2) << std::endl;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randpress: thermodynamic formalism for expanding random maps"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = -1;
  const char* ops[][2] = {
      {"pressure", "expected pressure E P over a t grid"},
      {"bowen", "Bowen root of E P(-t log|T'|) = 0"},
      {"classify", "asymptotic variance and essential / quasi-deterministic verdict"},
      {"spectrum", "temperature function and multifractal spectrum"},
      {"decay", "decay of correlations for the identity observable"},
      {"induce", "expanding return set, induced vs direct pressure, induced Bowen root"},
      {"julia", "pressure and dimension of random polynomial Julia sets"},
      {"describe", "branch tables, expansion floors and admissibility"},
      {"transfer", "L^n 1 on the grid and conformal cylinder masses"},
  };
  for (const auto& op : ops) {
    CLI::App* sub = app.add_subcommand(op[0], op[1]);
    sub->add_option("--config", config_path, "experiment config (YAML)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads (0: RANDPRESS_WORKERS or all cores)")
        ->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return fail(randpress::Error(randpress::ErrorCode::kConfiguration, e.what()));
  }
  const std::string op = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  try {
    randpress::ExperimentConfig cfg = randpress::load_config(config_path);
    if (!cfg.op.empty() && cfg.op != op) {
      throw randpress::Error(randpress::ErrorCode::kValidation, "config op does not match the subcommand",
                             {"op: config says '" + cfg.op + "', command line says '" + op + "'"});
    }
    cfg.op = op;
    if (sub->count("--seed")) {
      cfg.seed = seed;
    }
    if (workers >= 0) {
      cfg.knobs.workers = workers;
    } else if (const char* env = std::getenv("RANDPRESS_WORKERS"); env && *env) {
      cfg.knobs.workers = 0;  // resolved from the environment downstream
    }
    if (!out_dir.empty()) cfg.out = out_dir;
    if (cfg.out.empty()) cfg.out = "out";
    const randpress::ResultBundle bundle = randpress::run_experiment(cfg);
    randpress::write_bundle(bundle, cfg.out);
    std::cout << bundle.summary.dump(2) << std::endl;
    return 0;
  } catch (const randpress::Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(randpress::Error(randpress::ErrorCode::kInternal, e.what()));
  }
}
