#pragma once

#include "fadeopt/anneal.hpp"
#include "fadeopt/episim.hpp"
#include "fadeopt/parallel.hpp"
#include "fadeopt/qlearn.hpp"
#include "fadeopt/receivers.hpp"
#include "fadeopt/serialize.hpp"
#include "fadeopt/states.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fadeopt {

/// Bad or inconsistent configuration; maps to exit code 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Filesystem failure; maps to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FADEOPT_LOG");
    if (!env) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet" || v == "0") return LogLevel::quiet;
    if (v == "debug" || v == "2") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

inline void log_info(const std::string& message) {
  if (log_level() >= LogLevel::info) std::cerr << "[fadeopt] " << message << "\n";
}

inline void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::debug) std::cerr << "[fadeopt:debug] " << message << "\n";
}

/// Everything a run needs; every field has a default reproducing the reference
/// learning experiment (a=0.4, eta={1,0.01} with even odds, L=2, 10-point
/// grid, 5e5 episodes, 24 agents).
struct ExperimentConfig {
  SignalSource source{0.4, 0.5, 0.5};
  ChannelEnsemble channel = ChannelEnsemble::two_point(1.0, 0.01, 0.5);
  int layers = 2;
  std::vector<double> splits{0.5, 0.0};
  AnnealConfig anneal;
  DisplacementGrid grid = DisplacementGrid::linspace(-1.0, 1.0, 10);
  QLearnConfig rl = default_qlearn_config(500000);
  std::vector<double> sweep;
  int agents = 24;
  std::uint64_t seed = 20210401;
  std::string out_dir = "out";

  ExperimentConfig() {
    anneal.optimize_splits = true;
    sweep.reserve(15);
    for (int k = 1; k <= 15; ++k) sweep.push_back(0.1 * k);
  }

  void validate() const {
    source.validate();
    channel.validate();
    if (layers < 1) throw ConfigError("receiver.layers: must be >= 1");
    if (splits.size() != static_cast<std::size_t>(layers) || splits.back() != 0.0)
      throw ConfigError("receiver.splits: need layers entries with theta_L = 0");
    anneal.validate();
    grid.validate();
    rl.validate();
    if (agents < 1) throw ConfigError("agents: must be >= 1");
    if (sweep.empty()) throw ConfigError("sweep: must be nonempty");
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const char* where,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw ConfigError(std::string(where) + ": unknown field \"" + key + "\"");
  }
}

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

}  // namespace detail

/// Parses the config document, overlaying values onto the defaults. Errors
/// name the offending field; JSON syntax errors carry nlohmann's position.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::field_or;
  ExperimentConfig cfg;
  detail::reject_unknown_keys(j, "config",
                              {"source", "channel", "receiver", "anneal", "grid", "rl",
                               "sweep", "agents", "seed", "out"});

  if (j.contains("source")) {
    const auto& s = j.at("source");
    detail::reject_unknown_keys(s, "source", {"amplitude", "prior0"});
    cfg.source.amplitude = field_or(s, "amplitude", cfg.source.amplitude, "source");
    cfg.source.prior0 = field_or(s, "prior0", cfg.source.prior0, "source");
    cfg.source.prior1 = 1.0 - cfg.source.prior0;
  }
  if (j.contains("channel")) {
    const auto& c = j.at("channel");
    detail::reject_unknown_keys(c, "channel", {"transmissivities", "probabilities"});
    auto etas = field_or(c, "transmissivities",
                         std::vector<double>{cfg.channel.branches[0].transmissivity,
                                             cfg.channel.branches[1].transmissivity},
                         "channel");
    auto probs = field_or(c, "probabilities",
                          std::vector<double>{cfg.channel.branches[0].probability,
                                              cfg.channel.branches[1].probability},
                          "channel");
    if (etas.size() != 2) throw ConfigError("channel.transmissivities: exactly 2 required");
    if (probs.size() != 2) throw ConfigError("channel.probabilities: exactly 2 required");
    cfg.channel.branches = {{etas[0], probs[0]}, {etas[1], probs[1]}};
  }
  if (j.contains("receiver")) {
    const auto& r = j.at("receiver");
    detail::reject_unknown_keys(r, "receiver", {"layers", "splits"});
    cfg.layers = field_or(r, "layers", cfg.layers, "receiver");
    if (r.contains("splits")) {
      cfg.splits = field_or(r, "splits", cfg.splits, "receiver");
    } else if (cfg.layers >= 1) {
      cfg.splits.assign(static_cast<std::size_t>(cfg.layers), 0.5);
      cfg.splits.back() = 0.0;
    }
  }
  if (j.contains("anneal")) {
    const auto& a = j.at("anneal");
    detail::reject_unknown_keys(a, "anneal",
                                {"initial_temperature", "cooling_rate",
                                 "steps_per_temperature", "proposal_stddev",
                                 "temperature_floor", "restarts", "optimize_splits"});
    cfg.anneal.initial_temperature =
        field_or(a, "initial_temperature", cfg.anneal.initial_temperature, "anneal");
    cfg.anneal.cooling_rate = field_or(a, "cooling_rate", cfg.anneal.cooling_rate, "anneal");
    cfg.anneal.steps_per_temperature =
        field_or(a, "steps_per_temperature", cfg.anneal.steps_per_temperature, "anneal");
    cfg.anneal.proposal_stddev =
        field_or(a, "proposal_stddev", cfg.anneal.proposal_stddev, "anneal");
    cfg.anneal.temperature_floor =
        field_or(a, "temperature_floor", cfg.anneal.temperature_floor, "anneal");
    cfg.anneal.restarts = field_or(a, "restarts", cfg.anneal.restarts, "anneal");
    cfg.anneal.optimize_splits =
        field_or(a, "optimize_splits", cfg.anneal.optimize_splits, "anneal");
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown_keys(g, "grid", {"values", "min", "max", "points"});
    if (g.contains("values")) {
      cfg.grid.values = field_or(g, "values", cfg.grid.values, "grid");
    } else {
      const double lo = field_or(g, "min", -1.0, "grid");
      const double hi = field_or(g, "max", 1.0, "grid");
      const int n = field_or(g, "points", 10, "grid");
      if (n < 1) throw ConfigError("grid.points: must be >= 1");
      cfg.grid = DisplacementGrid::linspace(lo, hi, n);
    }
  }
  if (j.contains("rl")) {
    const auto& r = j.at("rl");
    detail::reject_unknown_keys(r, "rl",
                                {"episodes", "discount", "learning_rate", "epsilon0",
                                 "epsilon_tau", "epsilon_min", "q_init", "curve_stride"});
    cfg.rl.episodes = field_or<std::int64_t>(r, "episodes", cfg.rl.episodes, "rl");
    cfg.rl.epsilon.tau =
        cfg.rl.episodes > 0 ? static_cast<double>(cfg.rl.episodes) / 5.0 : 1.0;
    cfg.rl.discount = field_or(r, "discount", cfg.rl.discount, "rl");
    if (r.contains("learning_rate")) {
      const auto& lr = r.at("learning_rate");
      if (lr.is_string() && lr.get<std::string>() == "visits") {
        cfg.rl.learning_rate.mode = LearningRate::Mode::visit_count;
      } else if (lr.is_number()) {
        cfg.rl.learning_rate.mode = LearningRate::Mode::constant;
        cfg.rl.learning_rate.constant_value = lr.get<double>();
      } else {
        throw ConfigError("rl.learning_rate: expected \"visits\" or a constant");
      }
    }
    cfg.rl.epsilon.initial = field_or(r, "epsilon0", cfg.rl.epsilon.initial, "rl");
    cfg.rl.epsilon.tau = field_or(r, "epsilon_tau", cfg.rl.epsilon.tau, "rl");
    cfg.rl.epsilon.floor = field_or(r, "epsilon_min", cfg.rl.epsilon.floor, "rl");
    cfg.rl.q_init = field_or(r, "q_init", cfg.rl.q_init, "rl");
    cfg.rl.curve_stride = field_or<std::int64_t>(r, "curve_stride", cfg.rl.curve_stride, "rl");
  }
  cfg.sweep = field_or(j, "sweep", cfg.sweep, "config");
  cfg.agents = field_or(j, "agents", cfg.agents, "config");
  cfg.seed = field_or<std::uint64_t>(j, "seed", cfg.seed, "config");
  cfg.out_dir = field_or<std::string>(j, "out", cfg.out_dir, "config");

  cfg.rl.grid = cfg.grid;
  cfg.rl.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) {
    ExperimentConfig cfg;
    cfg.rl.grid = cfg.grid;
    cfg.rl.seed = cfg.seed;
    cfg.validate();
    return cfg;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << contents;
  if (!out) throw IoError("write failed: " + path.string());
}

/// CSV preamble; the timestamp line is dropped under --deterministic so
/// reruns are byte-identical.
inline std::string csv_header(const std::string& command, bool deterministic) {
  if (deterministic) return {};
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%FT%TZ", std::gmtime(&now));
  return "# fadeopt " + command + " generated " + stamp + "\n";
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return base ^ splitmix64(salt);
}

// ---------------------------------------------------------------------------
// bounds: Helstrom / homodyne / annealed L=1 / annealed L=2 across amplitudes
// ---------------------------------------------------------------------------

struct BoundsRow {
  double amplitude = 0.0;
  double helstrom = 0.0;
  double homodyne = 0.0;
  double adaptive1 = 0.0;
  double adaptive2 = 0.0;
};

/// The L=1 optimum embedded as a two-layer strategy: theta = (0, 0) sends
/// everything to the first detector and vacuum to the second, so the value is
/// unchanged. Used to warm-start the L=2 annealing.
inline ReceiverStrategy embed_single_layer(const ReceiverStrategy& kennedy_like) {
  ReceiverStrategy s;
  s.layers = 2;
  s.splits = {0.0, 0.0};
  s.displacements = {kennedy_like.displacements.at(0), 0.0, 0.0};
  s.guess = GuessRule::maximum_likelihood;
  return s;
}

inline BoundsRow bounds_row(const ExperimentConfig& cfg, double amplitude,
                            std::uint64_t row_salt) {
  SignalSource src = cfg.source;
  src.amplitude = amplitude;
  BoundsRow row;
  row.amplitude = amplitude;
  row.helstrom = helstrom_bound(src, cfg.channel);
  row.homodyne = homodyne_success(src, cfg.channel);

  AnnealConfig ann = cfg.anneal;
  ann.optimize_splits = false;
  ann.seed = derive_seed(cfg.seed, 2 * row_salt);
  const AnnealResult one = anneal_displacements(src, cfg.channel, 1, {0.0}, ann);
  row.adaptive1 = one.value;

  AnnealConfig ann2 = cfg.anneal;
  ann2.seed = derive_seed(cfg.seed, 2 * row_salt + 1);
  const ReceiverStrategy warm = embed_single_layer(one.strategy);
  const std::vector<double> splits2 =
      cfg.layers == 2 ? cfg.splits : std::vector<double>{0.5, 0.0};
  const AnnealResult two =
      anneal_displacements(src, cfg.channel, 2, splits2, ann2, nullptr, &warm);
  row.adaptive2 = two.value;
  return row;
}

struct RunOptions {
  int jobs = 1;
  bool deterministic = false;
  std::string out_dir;  // empty: use config's
};

inline std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                             const RunOptions& options) {
  return options.out_dir.empty() ? cfg.out_dir : options.out_dir;
}

inline std::vector<BoundsRow> compute_bounds(const ExperimentConfig& cfg,
                                             const RunOptions& options) {
  if (std::abs(cfg.source.prior0 - 0.5) > 1e-12)
    throw ConfigError("source.prior0: bounds requires equal priors (homodyne rule)");
  std::vector<BoundsRow> rows(cfg.sweep.size());
  parallel_for(options.jobs, static_cast<std::int64_t>(cfg.sweep.size()),
               [&](std::int64_t i) {
                 rows[static_cast<std::size_t>(i)] =
                     bounds_row(cfg, cfg.sweep[static_cast<std::size_t>(i)],
                                static_cast<std::uint64_t>(i));
               });
  return rows;
}

inline void run_bounds(const ExperimentConfig& cfg, const RunOptions& options) {
  const auto rows = compute_bounds(cfg, options);
  const auto dir = resolve_out_dir(cfg, options);

  std::string csv = csv_header("bounds", options.deterministic);
  csv += "amplitude,helstrom,homodyne,ar1,ar2\n";
  std::string gap = csv_header("bounds", options.deterministic);
  gap += "amplitude,homodyne_minus_helstrom,ar1_minus_helstrom,ar2_minus_helstrom\n";
  for (const auto& r : rows) {
    csv += format_value(r.amplitude) + ',' + format_value(r.helstrom) + ',' +
           format_value(r.homodyne) + ',' + format_value(r.adaptive1) + ',' +
           format_value(r.adaptive2) + '\n';
    gap += format_value(r.amplitude) + ',' + format_value(r.homodyne - r.helstrom) + ',' +
           format_value(r.adaptive1 - r.helstrom) + ',' +
           format_value(r.adaptive2 - r.helstrom) + '\n';
  }
  write_file(dir / "bounds.csv", csv);
  write_file(dir / "bounds_gap.csv", gap);
  log_info("bounds: wrote " + (dir / "bounds.csv").string() + " (" +
           std::to_string(rows.size()) + " rows)");
}

// ---------------------------------------------------------------------------
// optimize / gridsearch
// ---------------------------------------------------------------------------

inline void run_optimize(const ExperimentConfig& cfg, const RunOptions& options) {
  AnnealConfig ann = cfg.anneal;
  ann.seed = cfg.seed;
  std::vector<AnnealLogRow> log;
  const AnnealResult best =
      anneal_displacements(cfg.source, cfg.channel, cfg.layers, cfg.splits, ann, &log);
  const auto dir = resolve_out_dir(cfg, options);
  write_file(dir / "annealed_strategy.json", strategy_to_json(best.strategy).dump(2) + "\n");
  write_file(dir / "anneal_log.csv",
             csv_header("optimize", options.deterministic) + anneal_log_csv(log));
  std::cout << "annealed success probability: " << format_value(best.value) << "\n";
}

inline void run_gridsearch(const ExperimentConfig& cfg, const RunOptions& options) {
  const GridSearchResult best =
      grid_search(cfg.source, cfg.channel, cfg.grid, cfg.layers, cfg.splits);
  const auto dir = resolve_out_dir(cfg, options);
  write_file(dir / "grid_strategy.json", strategy_to_json(best.strategy).dump(2) + "\n");
  std::cout << "grid optimum: " << format_value(best.value) << " over "
            << best.evaluated << " configurations\n";
}

// ---------------------------------------------------------------------------
// train: multi-agent Q-learning ensemble
// ---------------------------------------------------------------------------

inline std::string agent_tag(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "agent_%02d", k);
  return buf;
}

inline void run_train(const ExperimentConfig& cfg, const RunOptions& options) {
  const auto dir = resolve_out_dir(cfg, options);
  std::vector<TrainResult> results(static_cast<std::size_t>(cfg.agents));

  parallel_for(options.jobs, cfg.agents, [&](std::int64_t k) {
    QLearnConfig rl = cfg.rl;
    rl.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(k));
    TrainResult r = train(cfg.source, cfg.channel, cfg.splits, rl, rng);

    const std::string tag = agent_tag(static_cast<int>(k));
    write_file(dir / (tag + "_curve.csv"),
               csv_header("train", options.deterministic) + learning_curve_csv(r.curve));
    write_file(dir / (tag + "_strategy.json"),
               strategy_to_json(greedy_strategy(r.table, rl, cfg.splits)).dump(2) + "\n");
    write_file(dir / (tag + "_qtable.json"), qtable_to_json(r.table, rl).dump() + "\n");
    log_debug(tag + " final P = " + format_value(r.curve.final_greedy_success()));
    results[static_cast<std::size_t>(k)] = std::move(r);
  });

  // Aggregate on stride rows (all agents record P_t at the same episodes).
  std::string agg = csv_header("train", options.deterministic);
  agg += "episode,mean_R,min_R,max_R,mean_P,min_P,max_P\n";
  if (cfg.rl.episodes > 0 && cfg.agents > 0) {
    const auto& strides = results[0].curve.greedy_success;
    for (std::size_t row = 0; row < strides.size(); ++row) {
      const std::int64_t episode = strides[row].first;
      double sum_r = 0, min_r = 1, max_r = 0, sum_p = 0, min_p = 1, max_p = 0;
      for (const auto& r : results) {
        const double rt = r.curve.returns[static_cast<std::size_t>(episode - 1)];
        const double pt = r.curve.greedy_success[row].second;
        sum_r += rt;
        min_r = std::min(min_r, rt);
        max_r = std::max(max_r, rt);
        sum_p += pt;
        min_p = std::min(min_p, pt);
        max_p = std::max(max_p, pt);
      }
      agg += std::to_string(episode) + ',' + format_value(sum_r / cfg.agents) + ',' +
             format_value(min_r) + ',' + format_value(max_r) + ',' +
             format_value(sum_p / cfg.agents) + ',' + format_value(min_p) + ',' +
             format_value(max_p) + '\n';
    }
  }
  write_file(dir / "aggregate.csv", agg);

  double mean_final = 0.0;
  for (const auto& r : results) mean_final += r.curve.final_greedy_success();
  if (cfg.agents > 0) mean_final /= cfg.agents;
  std::cout << "trained " << cfg.agents << " agents, mean final P_t = "
            << format_value(mean_final) << "\n";
}

// ---------------------------------------------------------------------------
// mc: Monte-Carlo check of a stored strategy
// ---------------------------------------------------------------------------

inline void run_mc(const ExperimentConfig& cfg, const RunOptions& options,
                   const std::string& strategy_path, std::int64_t episodes,
                   const std::string& trace_path) {
  ReceiverStrategy strategy;
  if (strategy_path.empty()) {
    strategy = kennedy_strategy(-cfg.source.amplitude);
  } else {
    std::ifstream in(strategy_path);
    if (!in) throw IoError("cannot open strategy file: " + strategy_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("strategy parse error: ") + e.what());
    }
    strategy = strategy_from_json(j);
  }

  RngStream rng(cfg.seed, 0x3Cu);
  (void)options;
  if (!trace_path.empty()) {
    const EpisodePolicy policy = strategy_policy(strategy, cfg.source, cfg.channel);
    std::string lines;
    std::int64_t wins = 0;
    for (std::int64_t t = 0; t < episodes; ++t) {
      const EpisodeRecord rec =
          sample_episode(cfg.source, cfg.channel, strategy.splits, policy, rng);
      wins += rec.reward;
      lines += episode_to_json(rec).dump() + "\n";
    }
    write_file(trace_path, lines);
    const double p = static_cast<double>(wins) / static_cast<double>(episodes);
    std::cout << "mc estimate: " << format_value(p) << " +/- "
              << format_value(std::sqrt(p * (1 - p) / static_cast<double>(episodes)))
              << " (" << episodes << " episodes)\n";
    return;
  }

  const MonteCarloEstimate mc =
      monte_carlo_success(strategy, cfg.source, cfg.channel, episodes, rng);
  std::cout << "mc estimate: " << format_value(mc.estimate) << " +/- "
            << format_value(mc.standard_error) << " (" << mc.episodes << " episodes)\n";
  std::cout << "exact value: "
            << format_value(success_probability(strategy, cfg.source, cfg.channel)) << "\n";
}

// ---------------------------------------------------------------------------
// validate: oracle-equivalence suite
// ---------------------------------------------------------------------------

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double deviation = 0.0;
  double tolerance = 0.0;
};

inline std::vector<ValidationCheck> validation_suite(const ExperimentConfig& cfg,
                                                     int fock_nmax) {
  std::vector<ValidationCheck> checks;

  // Gram-embedding Helstrom vs truncated-Fock oracle.
  {
    ValidationCheck c{"helstrom gram-embedding vs fock oracle", false, 0.0, 1e-8};
    bool truncated = false;
    for (double a : {0.1, 0.4, 0.8, 1.2}) {
      for (double eta1 : {0.01, 0.5, 1.0}) {
        for (double pi0 : {0.25, 0.5, 0.75}) {
          SignalSource src{a, 0.5, 0.5};
          const auto channel = ChannelEnsemble::two_point(1.0, eta1, pi0);
          const FockHelstrom oracle = helstrom_fock_oracle(src, channel, fock_nmax);
          truncated = truncated || oracle.truncated();
          c.deviation =
              std::max(c.deviation, std::abs(helstrom_bound(src, channel) - oracle.value));
        }
      }
    }
    if (truncated)
      log_info("warning: Fock truncation deficit exceeds 1e-10 at n_max=" +
               std::to_string(fock_nmax) + "; bound comparison unreliable");
    c.passed = c.deviation <= c.tolerance && !truncated;
    checks.push_back(c);
  }

  // Exact success probability vs Monte-Carlo, 4 sigma.
  {
    ValidationCheck c{"exact vs monte-carlo success", false, 0.0, 4.0};
    RngStream rng(cfg.seed, 0x77);
    double worst = 0.0;
    const GridSearchResult grid_best =
        grid_search(cfg.source, cfg.channel, cfg.grid, 2, {0.5, 0.0});
    const ReceiverStrategy candidates[] = {kennedy_strategy(-cfg.source.amplitude),
                                           grid_best.strategy};
    for (const auto& s : candidates) {
      const double exact = success_probability(s, cfg.source, cfg.channel);
      const MonteCarloEstimate mc =
          monte_carlo_success(s, cfg.source, cfg.channel, 100000, rng);
      if (mc.standard_error > 0)
        worst = std::max(worst, std::abs(mc.estimate - exact) / mc.standard_error);
    }
    c.deviation = worst;
    c.passed = worst <= c.tolerance;
    checks.push_back(c);
  }

  // Annealed L=1 vs fine displacement grid.
  {
    ValidationCheck c{"anneal L=1 vs fine-grid oracle", false, 0.0, 1e-4};
    const double a = cfg.source.amplitude;
    double best = 0.0;
    const int n = 4001;
    for (int k = 0; k < n; ++k) {
      const double beta = -2.0 * a + 4.0 * a * k / (n - 1.0);
      best = std::max(best,
                      success_probability(kennedy_strategy(beta), cfg.source, cfg.channel));
    }
    AnnealConfig ann = cfg.anneal;
    ann.optimize_splits = false;
    ann.seed = derive_seed(cfg.seed, 0x51);
    const AnnealResult annealed =
        anneal_displacements(cfg.source, cfg.channel, 1, {0.0}, ann);
    c.deviation = std::abs(annealed.value - best);
    c.passed = annealed.value >= best - 1e-4;
    checks.push_back(c);
  }

  return checks;
}

/// Prints one line per check; returns false (exit 1) if any check failed.
inline bool run_validate(const ExperimentConfig& cfg, int fock_nmax) {
  bool all = true;
  for (const auto& c : validation_suite(cfg, fock_nmax)) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name
              << " (deviation " << format_value(c.deviation) << ", tolerance "
              << format_value(c.tolerance) << ")\n";
    all = all && c.passed;
  }
  return all;
}

}  // namespace fadeopt
