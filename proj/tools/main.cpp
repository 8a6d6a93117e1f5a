#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qdmag/errors.hpp"
#include "qdmag/parallel.hpp"

int main(int argc, char** argv) {
  using namespace qdmag::cli;
  CLI::App app{"Bayesian field estimation with quantum-dot electron spins in a nuclear bath"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = qdmag::default_thread_count();
  std::uint64_t seed = 0;
  int quad_nodes = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "Configuration file (key = value with [sections])")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* quad_opt = app.add_option("--quad-nodes", quad_nodes, "Quadrature nodes (overrides the config)")
                       ->check(CLI::Range(2, 1 << 20));
  app.add_flag("--quiet", quiet, "No progress output");

  for (const auto& name : kCommands) app.add_subcommand(name)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = config_path.empty() ? parse_config("") : load_config(config_path);
    if (*seed_opt) config.sim.seed = seed;
    if (*quad_opt) config.sim.quad_nodes = quad_nodes;
    RunOptions options{out_dir, threads, quiet};
    return run_command(command, config, options);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qdmag::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
