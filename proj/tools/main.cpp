#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "bilayer/experiment.hpp"
#include "bilayer/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = -1;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--threads", args.threads, "worker threads (wall time only, never results)");
  cmd->add_option("--seed", args.seed, "override the dTWA master seed");
}

bilayer::ExperimentConfig load(const CommonArgs& args) {
  bilayer::ExperimentConfig config = bilayer::load_config(args.config_path);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.threads >= 0) config.threads = args.threads;
  if (args.seed >= 0) config.dtwa_seed = static_cast<std::uint64_t>(args.seed);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilayer spin-squeezing simulator"};
  app.set_version_flag("--version", bilayer::kVersion);
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, oracle_args;
  std::string summary_path;

  CLI::App* run = app.add_subcommand("run", "single runs over the configured parameter points");
  add_common(run, run_args);
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep with summary and fits");
  add_common(sweep, sweep_args);
  CLI::App* oracle = app.add_subcommand("oracle", "exact reference series and dTWA comparison");
  add_common(oracle, oracle_args);
  CLI::App* fit = app.add_subcommand("fit", "refit size scaling from a sweep summary");
  fit->add_option("--summary", summary_path, "sweep summary JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto records = bilayer::run_experiment(load(run_args));
      std::cout << "wrote " << records.size() << " series\n";
    } else if (sweep->parsed()) {
      const auto summary = bilayer::sweep_experiment(load(sweep_args));
      std::cout << "summary: " << summary.string() << "\n";
    } else if (oracle->parsed()) {
      const auto report = bilayer::oracle_experiment(load(oracle_args));
      std::cout << "report: " << report.string() << "\n";
    } else if (fit->parsed()) {
      std::cout << bilayer::fit_summary(summary_path) << "\n";
    }
  } catch (const bilayer::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
