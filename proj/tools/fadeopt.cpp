// fadeopt: exact bounds, receiver optimization and Q-learning calibration for
// BPSK coherent-state discrimination over a two-point variable-loss channel.

#include "fadeopt/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment config (defaults reproduce the built-in experiment)");
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "base seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--jobs", args.jobs, "max concurrent workers")->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", args.deterministic,
                "suppress timestamp headers so reruns are byte-identical");
}

fadeopt::ExperimentConfig load(const CommonArgs& args) {
  fadeopt::ExperimentConfig cfg = fadeopt::load_config(args.config_path);
  if (args.seed_set) {
    cfg.seed = args.seed;
    cfg.rl.seed = args.seed;
  }
  return cfg;
}

fadeopt::RunOptions options_of(const CommonArgs& args) {
  fadeopt::RunOptions opt;
  opt.jobs = args.jobs;
  opt.deterministic = args.deterministic;
  opt.out_dir = args.out_dir;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherent-state receiver toolkit for variable-loss channels"};
  app.require_subcommand(1);

  CommonArgs bounds_args, optimize_args, grid_args, train_args, validate_args, mc_args;

  CLI::App* bounds = app.add_subcommand(
      "bounds", "Helstrom / homodyne / annealed L=1,2 success probabilities over the amplitude sweep");
  add_common(bounds, bounds_args);

  CLI::App* optimize =
      app.add_subcommand("optimize", "simulated-annealing optimization of the configured receiver");
  add_common(optimize, optimize_args);

  CLI::App* gridsearch =
      app.add_subcommand("gridsearch", "exhaustive search over the displacement grid");
  add_common(gridsearch, grid_args);

  CLI::App* train =
      app.add_subcommand("train", "train the Q-learning agent ensemble and emit learning curves");
  add_common(train, train_args);

  CLI::App* validate =
      app.add_subcommand("validate", "run the oracle-equivalence suite and report deviations");
  add_common(validate, validate_args);
  int fock_nmax = 30;
  validate->add_option("--fock-nmax", fock_nmax, "Fock truncation for the Helstrom oracle");

  CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo estimate of a stored strategy");
  add_common(mc, mc_args);
  std::string strategy_path, trace_path;
  std::int64_t mc_episodes = 100000;
  mc->add_option("--strategy", strategy_path, "strategy JSON (default: Kennedy nulling at -a)");
  mc->add_option("--episodes", mc_episodes, "number of simulated episodes")
      ->check(CLI::PositiveNumber);
  mc->add_option("--trace", trace_path, "dump per-episode records as JSON lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds->parsed()) {
      fadeopt::run_bounds(load(bounds_args), options_of(bounds_args));
    } else if (optimize->parsed()) {
      fadeopt::run_optimize(load(optimize_args), options_of(optimize_args));
    } else if (gridsearch->parsed()) {
      fadeopt::run_gridsearch(load(grid_args), options_of(grid_args));
    } else if (train->parsed()) {
      fadeopt::run_train(load(train_args), options_of(train_args));
    } else if (validate->parsed()) {
      if (!fadeopt::run_validate(load(validate_args), fock_nmax)) return kExitValidation;
    } else if (mc->parsed()) {
      fadeopt::run_mc(load(mc_args), options_of(mc_args), strategy_path, mc_episodes,
                      trace_path);
    }
  } catch (const fadeopt::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
