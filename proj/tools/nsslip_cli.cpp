#include <iostream>

#include <CLI11.hpp>

#include "nsslip/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Navier-Stokes boundary control with slip conditions"};
  app.set_version_flag("--version", nsslip::version_string());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  for (const char* name : {"simulate", "optimize", "verify", "spectrum"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "run directory");
    sub->add_option("--seed", seed, "base seed, overrides the config");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : nsslip::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();

  nsslip::ExperimentConfig cfg;
  try {
    cfg = nsslip::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return nsslip::kExitConfig;
  }
  if (sub->count("--out")) cfg.output_dir = out_dir;
  if (sub->count("--seed")) cfg.seed = seed;
  if (sub->count("--threads")) cfg.threads = threads;
  return nsslip::run_command(command, cfg, std::cout);
}
