#include <CLI11.hpp>
#include <iostream>

#include "chainlab/config.hpp"
#include "chainlab/error.hpp"
#include "chainlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"chainlab: energy diffusion experiments for a noisy anharmonic chain"};
  std::string config_path;
  bool strict = false;
  std::size_t parallelism = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "Run configuration (INI-style key = value file)")->required();
  app.add_flag("--strict", strict, "Exit nonzero when any built-in check fails");
  app.add_option("--parallelism", parallelism, "Worker threads for replica ensembles")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out, "Override the output directory");
  app.set_version_flag("--version", chainlab::library_version());
  CLI11_PARSE(app, argc, argv);

  chainlab::RunConfig config;
  try {
    config = chainlab::load_config(config_path);
  } catch (const chainlab::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return chainlab::kExitConfig;
  }
  chainlab::RunOptions options;
  options.strict = strict;
  options.parallelism = parallelism;
  options.seed_override = seed;
  options.out_dir = out;
  options.log = &std::cout;
  const chainlab::RunOutcome outcome = chainlab::run(config, options);
  return outcome.exit_code;
}
