// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Usage: fadeopt_acceptance <path-to-fadeopt-cli>

#include "fadeopt/experiment.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fadeopt;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, const std::string& name, bool passed, const std::string& detail,
            double seconds) {
  if (!passed) ++g_failures;
  std::printf("[%s] criterion %2d: %s (%s; %.2fs)\n", passed ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string fmt(double v) { return format_value(v); }

const ChannelEnsemble kFigureChannel = ChannelEnsemble::two_point(1.0, 0.01, 0.5);
const SignalSource kFigureSource{0.4, 0.5, 0.5};

// --------------------------------------------------------------------------

void criterion_1() {
  Timer timer;
  double max_dev = 0.0;
  for (double eta : {0.01, 0.5, 1.0})
    for (double a : {0.1, 0.4, 0.8, 1.2}) {
      const SignalSource src{a, 0.5, 0.5};
      const double bound = helstrom_bound(src, ChannelEnsemble::two_point(eta, eta, 0.5));
      max_dev = std::max(max_dev, std::abs(bound - pure_helstrom(a, eta, 0.5)));
    }
  const double spot =
      std::abs(helstrom_bound({0.4, 0.5, 0.5}, ChannelEnsemble::single(1.0)) -
               0.8437686634776909);
  const double secs = timer.seconds();
  report(1, "Helstrom degenerate-channel check", max_dev <= 1e-10 && spot <= 1e-9 && secs < 1.0,
         "max |embedding - closed form| = " + fmt(max_dev), secs);
}

void criterion_2() {
  Timer timer;
  double max_dev = 0.0;
  int tuples = 0;
  auto probe = [&](double a, double eta0, double eta1, double pi0) {
    const SignalSource src{a, 0.5, 0.5};
    const auto channel = ChannelEnsemble::two_point(eta0, eta1, pi0);
    const FockHelstrom oracle = helstrom_fock_oracle(src, channel, 30);
    max_dev = std::max(max_dev, std::abs(helstrom_bound(src, channel) - oracle.value));
    ++tuples;
  };
  for (double a : {0.1, 0.3, 0.4, 0.7, 1.0, 1.3})
    for (auto [eta0, eta1] : std::vector<std::pair<double, double>>{
             {1.0, 0.01}, {1.0, 0.25}, {0.8, 0.1}, {0.6, 0.6}})
      for (double pi0 : {0.3, 0.5}) probe(a, eta0, eta1, pi0);
  probe(1.5, 1.0, 0.01, 0.5);
  probe(1.5, 1.0, 0.01, 0.3);  // 50 tuples total, includes a=0.4, {1,0.01}, 1/2
  const double secs = timer.seconds();
  report(2, "cross-oracle Helstrom (Gram embedding vs Fock, n_max=30)",
         max_dev <= 1e-8 && tuples == 50 && secs < 5.0,
         std::to_string(tuples) + " tuples, max dev = " + fmt(max_dev), secs);
}

void criterion_3() {
  Timer timer;
  const double closed = homodyne_success(kFigureSource, kFigureChannel);
  const double quad = oracles::homodyne_by_integration(kFigureSource, kFigureChannel);
  const double secs = timer.seconds();
  report(3, "homodyne point value 0.66002 +/- 5e-4",
         std::abs(closed - 0.66002) <= 5e-4 && std::abs(quad - 0.66002) <= 5e-4 &&
             std::abs(closed - quad) <= 1e-9,
         "closed form = " + fmt(closed) + ", quadrature oracle = " + fmt(quad), secs);
}

std::vector<BoundsRow> g_rows;

void criterion_4() {
  Timer timer;
  ExperimentConfig cfg;
  cfg.rl.grid = cfg.grid;
  RunOptions options;
  options.jobs = 1;
  g_rows = compute_bounds(cfg, options);
  bool ordered = true;
  std::string worst;
  for (const auto& r : g_rows) {
    const bool row_ok = r.helstrom >= r.adaptive2 - 1e-9 &&
                        r.adaptive2 >= r.adaptive1 - 1e-9 &&
                        r.helstrom >= r.homodyne - 1e-9;
    if (!row_ok && worst.empty()) worst = " first violation at a = " + fmt(r.amplitude);
    ordered = ordered && row_ok;
  }
  const double secs = timer.seconds();
  report(4, "ordering helstrom >= ar2 >= ar1, helstrom >= homodyne on the sweep",
         ordered && secs < 120.0,
         std::to_string(g_rows.size()) + " amplitudes" + worst, secs);
}

void criterion_5() {
  Timer timer;
  bool low_amplitude_advantage = false;
  bool transition_found = false;
  double a_star = 0.0;
  for (const auto& r : g_rows) {
    if (std::abs(r.amplitude - 0.4) < 1e-12)
      low_amplitude_advantage = r.adaptive1 > r.homodyne && r.adaptive2 > r.homodyne;
    // the transition of interest is the degradation past the advantage
    // region, so only amplitudes above 0.4 count
    if (r.amplitude > 0.4 && r.adaptive1 < r.homodyne &&
        r.adaptive2 >= r.homodyne - 0.02 && !transition_found) {
      transition_found = true;
      a_star = r.amplitude;
    }
  }
  const double secs = timer.seconds();
  report(5, "Kennedy transition: L=1 falls below homodyne, L=2 stays close",
         low_amplitude_advantage && transition_found,
         transition_found ? "transition at a* = " + fmt(a_star) : "no transition found",
         secs);
}

void criterion_6() {
  Timer timer;
  RngStream strategy_rng(606);
  int within = 0;
  const int trials = 10;
  for (int k = 0; k < trials; ++k) {
    ReceiverStrategy s;
    s.layers = 2;
    s.splits = {strategy_rng.uniform(), 0.0};
    s.displacements = {2.0 * strategy_rng.uniform() - 1.0,
                       2.0 * strategy_rng.uniform() - 1.0,
                       2.0 * strategy_rng.uniform() - 1.0};
    const double exact = success_probability(s, kFigureSource, kFigureChannel);
    RngStream rng(607, static_cast<std::uint64_t>(k));
    const MonteCarloEstimate mc =
        monte_carlo_success(s, kFigureSource, kFigureChannel, 100000, rng);
    if (std::abs(mc.estimate - exact) <= 4.0 * mc.standard_error) ++within;
  }
  const double secs = timer.seconds();
  report(6, "Monte-Carlo vs exact success (1e5 episodes, 4 sigma)",
         within >= 9 && secs < 30.0,
         std::to_string(within) + "/" + std::to_string(trials) + " within 4 sigma", secs);
}

struct EnsembleRun {
  std::vector<TrainResult> agents;
  double grid_optimum = 0.0;
  std::uint64_t grid_evaluated = 0;
  double seconds = 0.0;
};

EnsembleRun run_ensemble(std::int64_t episodes, int n_agents) {
  Timer timer;
  EnsembleRun run;
  const GridSearchResult grid =
      grid_search(kFigureSource, kFigureChannel, DisplacementGrid::linspace(-1.0, 1.0, 10),
                  2, {0.5, 0.0});
  run.grid_optimum = grid.value;
  run.grid_evaluated = grid.evaluated;
  QLearnConfig config = default_qlearn_config(episodes);
  config.grid = DisplacementGrid::linspace(-1.0, 1.0, 10);
  run.agents.resize(static_cast<std::size_t>(n_agents));
  for (int k = 0; k < n_agents; ++k) {
    RngStream rng(20210401, static_cast<std::uint64_t>(k));
    run.agents[static_cast<std::size_t>(k)] =
        train(kFigureSource, kFigureChannel, {0.5, 0.0}, config, rng);
  }
  run.seconds = timer.seconds();
  return run;
}

void criteria_7_and_8() {
  const EnsembleRun run = run_ensemble(100000, 24);

  {
    Timer timer;
    bool bounded = true;
    for (const auto& agent : run.agents)
      for (const auto& [t, p] : agent.curve.greedy_success)
        bounded = bounded && p <= run.grid_optimum + 1e-12;
    const double secs = timer.seconds();
    report(7, "grid oracle: exactly 1000 configurations, bounds every recorded P_t",
           run.grid_evaluated == 1000 && bounded,
           "evaluated = " + std::to_string(run.grid_evaluated) + ", grid optimum = " +
               fmt(run.grid_optimum),
           secs);
  }

  {
    int hits = 0;
    double mean_final = 0.0;
    for (const auto& agent : run.agents) {
      const double final_p = agent.curve.final_greedy_success();
      mean_final += final_p;
      if (final_p >= 0.99 * run.grid_optimum) ++hits;
    }
    mean_final /= static_cast<double>(run.agents.size());
    const double frac = static_cast<double>(hits) / static_cast<double>(run.agents.size());
    const double homodyne = homodyne_success(kFigureSource, kFigureChannel);
    const bool passed = frac >= 0.75 && mean_final > 0.66002 && run.seconds < 300.0;
    report(8, "RL convergence: 24 agents, T=1e5, default schedules",
           passed,
           fmt(100.0 * frac) + "% of agents at >= 0.99*grid_opt (need 75%), mean final P_t = " +
               fmt(mean_final) + " vs homodyne " + fmt(homodyne),
           run.seconds);

    // non-gating context: the same defaults at the full reference episode count
    const EnsembleRun full = run_ensemble(500000, 24);
    int full_hits = 0;
    double full_mean = 0.0;
    for (const auto& agent : full.agents) {
      full_mean += agent.curve.final_greedy_success();
      if (agent.curve.final_greedy_success() >= 0.99 * full.grid_optimum) ++full_hits;
    }
    full_mean /= static_cast<double>(full.agents.size());
    std::printf("[info] non-gating full-scale run (T=5e5): %d/24 agents at >= "
                "0.99*grid_opt, mean final P_t = %s (%.2fs)\n",
                full_hits, fmt(full_mean).c_str(), full.seconds);
  }
}

void criterion_9(const std::string& cli) {
  Timer timer;
  const fs::path base = fs::temp_directory_path() / "fadeopt_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path cfg_path = base / "train.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"rl": {"episodes": 2000, "curve_stride": 100}, "agents": 2, "seed": 123})";
  }
  auto run_train_cli = [&](const std::string& out_dir) {
    const std::string cmd = cli + " train --config " + cfg_path.string() +
                            " --deterministic --out " + out_dir + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const fs::path d1 = base / "run1", d2 = base / "run2";
  bool ok = run_train_cli(d1.string()) && run_train_cli(d2.string());
  int files = 0;
  if (ok) {
    for (const auto& entry : fs::directory_iterator(d1)) {
      const fs::path twin = d2 / entry.path().filename();
      std::ifstream a(entry.path(), std::ios::binary), b(twin, std::ios::binary);
      std::ostringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      ok = ok && fs::exists(twin) && sa.str() == sb.str();
      ++files;
    }
  }
  const double secs = timer.seconds();
  report(9, "cmd_train reruns are byte-identical under --deterministic", ok && files == 7,
         std::to_string(files) + " files compared", secs);
}

void criterion_10() {
  Timer timer;
  QLearnConfig config = default_qlearn_config(1000);
  HistoryState s;
  s.push_action(0);
  s.push_outcome(0);

  bool examples_ok = true;
  {
    QTable table(0.0);
    config.learning_rate = {LearningRate::Mode::constant, 0.1};
    q_update(table, s, 0, 2, 1.0, nullptr, 0, config);
    examples_ok = examples_ok && table.read(s, 0).value == 0.1;
  }
  {
    QTable table(0.0);
    config.learning_rate = {LearningRate::Mode::constant, 0.5};
    table.at(s, 0, 2).value = 0.5;
    q_update(table, s, 0, 2, 0.0, nullptr, 0, config);
    examples_ok = examples_ok && table.read(s, 0).value == 0.25;
  }
  {
    QTable table(0.0);
    config.learning_rate = {LearningRate::Mode::constant, 0.1};
    config.discount = 1.0;
    HistoryState next = s;
    next.push_action(1);
    next.push_outcome(1);
    table.at(next, 0, 2).value = 0.8;
    q_update(table, s, 0, 2, 0.0, &next, 2, config);
    examples_ok = examples_ok && std::abs(table.read(s, 0).value - 0.08) < 1e-15;
  }

  bool bounded = true;
  {
    QTable table(0.5);
    RngStream rng(1010);
    std::vector<HistoryState> states(16);
    for (int k = 0; k < 16; ++k) {
      states[static_cast<std::size_t>(k)].push_action(k);
      states[static_cast<std::size_t>(k)].push_outcome(k % 2);
    }
    for (std::int64_t k = 0; k < 1000000; ++k) {
      auto& from = states[rng.uniform_below(16)];
      const int action = static_cast<int>(rng.uniform_below(4));
      const double reward = rng.uniform() < 0.5 ? 1.0 : 0.0;
      config.discount = rng.uniform();
      config.learning_rate =
          rng.uniform() < 0.5
              ? LearningRate{LearningRate::Mode::visit_count, 0.1}
              : LearningRate{LearningRate::Mode::constant, 0.05 + 0.9 * rng.uniform()};
      if (rng.uniform() < 0.5)
        q_update(table, from, action, 4, reward, nullptr, 0, config);
      else
        q_update(table, from, action, 4, 0.0, &states[rng.uniform_below(16)], 4, config);
    }
    for (const auto& st : states)
      for (int a = 0; a < 4; ++a) {
        const double v = table.read(st, a).value;
        bounded = bounded && v >= 0.0 && v <= 1.0;
      }
  }
  const double secs = timer.seconds();
  report(10, "Q-update unit semantics and boundedness over 1e6 updates",
         examples_ok && bounded, examples_ok ? "examples exact, values in [0,1]" : "example mismatch",
         secs);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: fadeopt_acceptance <path-to-fadeopt-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];

  std::printf("fadeopt acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criteria_7_and_8();
  criterion_9(cli);
  criterion_10();

  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
