#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "flowtopo/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"flowtopo: phase-field topology optimization of stationary Navier-Stokes flow"};
  app.footer(
      "modes: solve | optimize | continue | verify-gradient | verify-shape | gamma-check\n"
      "exit codes: 0 success, 1 numerical failure, 2 usage/config error");

  std::string mode;
  std::string config_path;
  std::string outdir = "out";
  long long seed = -1;
  bool verbose = false;
  app.add_option("mode", mode, "run mode")->required();
  app.add_option("--config", config_path, "path to the JSON config")->required();
  app.add_option("--out", outdir, "output directory (default: out)");
  app.add_option("--seed", seed, "seed override for randomized verification modes");
  app.add_flag("--verbose", verbose, "per-iteration solver output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (!flowtopo::is_known_mode(mode)) {
    std::fprintf(stderr, "error: unknown mode '%s'\n%s\n", mode.c_str(), app.help().c_str());
    return 2;
  }

  try {
    const flowtopo::RunConfig config = flowtopo::parse_config(config_path, seed);
    return flowtopo::run_mode(mode, config, outdir, verbose);
  } catch (const flowtopo::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 1;
  }
}
