#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsh/harness.hpp"
#include "qsh/parallel.hpp"

int main(int argc, char** argv) {
  namespace h = qsh::harness;
  CLI::App app{"Spin Chern numbers and spin edge currents of lattice models"};
  app.set_version_flag("--version", std::string(h::kToolVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string dir;
  int threads = qsh::default_threads();
  bool force = false;

  auto* run = app.add_subcommand("run", "Run one experiment");
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid with checkpointing");
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  auto* report = app.add_subcommand("report", "Summarize a result directory");
  for (auto* sub : {run, sweep}) {
    sub->add_option("--config,-c", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out, "Output directory (overrides output_dir)");
    sub->add_option("--threads,-j", threads, "Worker threads (default QSH_THREADS or 1)")->check(CLI::PositiveNumber);
    sub->add_flag("--force-budget", force, "Run even if the cost estimate exceeds the budget");
  }
  validate->add_option("--config,-c", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  report->add_option("dir", dir, "Result directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitValidation;
  }

  h::RunOptions opts;
  if (!out.empty()) opts.out_dir = out;
  opts.threads = threads;
  opts.force_budget = force;
  try {
    if (*run) return h::run(config, opts, std::cerr);
    if (*sweep) return h::sweep(config, opts, std::cerr);
    if (*validate) return h::validate(config, std::cerr);
    if (*report) return h::report(dir, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return h::kExitFailure;
  }
  return h::kExitFailure;
}
