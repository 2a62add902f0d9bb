#pragma once

#include "fadeopt/anneal.hpp"
#include "fadeopt/episim.hpp"
#include "fadeopt/receivers.hpp"
#include "fadeopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fadeopt {

/// Alternating record (a0, o1, a1, o2, ...) of action indices and detector
/// outcomes within one episode; the effective MDP state of the POMDP.
struct HistoryState {
  std::vector<int> items;  // even positions actions, odd positions outcomes

  bool empty() const { return items.empty(); }
  bool expects_outcome() const { return items.size() % 2 == 1; }

  void push_action(int a) {
    if (expects_outcome())
      throw std::logic_error("HistoryState: outcome expected before next action");
    items.push_back(a);
  }
  void push_outcome(int o) {
    if (!expects_outcome())
      throw std::logic_error("HistoryState: action expected before next outcome");
    items.push_back(o);
  }

  /// Stable text encoding, e.g. "a3|o1|a7"; "" for the episode start.
  std::string key() const {
    std::string out;
    out.reserve(items.size() * 4);
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (k) out.push_back('|');
      out.push_back(k % 2 == 0 ? 'a' : 'o');
      out += std::to_string(items[k]);
    }
    return out;
  }
};

/// Tabular action-value store. Rows are created on first touch; absent
/// entries read as the initialization value with zero visits.
class QTable {
 public:
  struct Cell {
    double value = 0.0;
    std::int64_t visits = 0;
  };

  explicit QTable(double init = 0.0) : init_(init) {}

  double init_value() const { return init_; }

  Cell& at(const HistoryState& state, int action, int n_actions) {
    auto& row = row_for(state, n_actions);
    return row[static_cast<std::size_t>(action)];
  }

  Cell read(const HistoryState& state, int action) const {
    const auto it = rows_.find(state.key());
    if (it == rows_.end() || action >= static_cast<int>(it->second.size()))
      return Cell{init_, 0};
    return it->second[static_cast<std::size_t>(action)];
  }

  double max_value(const HistoryState& state, int n_actions) const {
    const auto it = rows_.find(state.key());
    if (it == rows_.end()) return init_;
    double best = init_;
    bool first = true;
    for (int a = 0; a < n_actions; ++a) {
      const double v = a < static_cast<int>(it->second.size())
                           ? it->second[static_cast<std::size_t>(a)].value
                           : init_;
      if (first || v > best) best = v, first = false;
    }
    return best;
  }

  /// Greedy action, ties broken by the lowest index.
  int argmax(const HistoryState& state, int n_actions) const {
    const auto it = rows_.find(state.key());
    if (it == rows_.end()) return 0;
    int best = 0;
    double best_value = it->second.empty() ? init_ : it->second[0].value;
    for (int a = 1; a < n_actions; ++a) {
      const double v = a < static_cast<int>(it->second.size())
                           ? it->second[static_cast<std::size_t>(a)].value
                           : init_;
      if (v > best_value) best = a, best_value = v;
    }
    return best;
  }

  const std::unordered_map<std::string, std::vector<Cell>>& rows() const { return rows_; }

  std::size_t state_count() const { return rows_.size(); }

 private:
  std::vector<Cell>& row_for(const HistoryState& state, int n_actions) {
    auto [it, inserted] = rows_.try_emplace(state.key());
    if (inserted) it->second.assign(static_cast<std::size_t>(n_actions), Cell{init_, 0});
    return it->second;
  }

  double init_ = 0.0;
  std::unordered_map<std::string, std::vector<Cell>> rows_;
};

struct LearningRate {
  enum class Mode { constant, visit_count };
  Mode mode = Mode::visit_count;
  double constant_value = 0.1;
};

struct EpsilonSchedule {
  double initial = 1.0;
  double tau = 1.0;
  double floor = 0.01;
};

struct QLearnConfig {
  std::int64_t episodes = 500000;
  double discount = 1.0;
  LearningRate learning_rate;
  EpsilonSchedule epsilon;
  DisplacementGrid grid = DisplacementGrid::linspace(-1.0, 1.0, 10);
  double q_init = 0.0;
  std::int64_t curve_stride = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (episodes < 0) throw std::invalid_argument("rl.episodes: must be >= 0");
    if (!(discount >= 0.0) || !(discount <= 1.0))
      throw std::invalid_argument("rl.discount: must lie in [0,1]");
    if (learning_rate.mode == LearningRate::Mode::constant &&
        (!(learning_rate.constant_value > 0.0) || !(learning_rate.constant_value <= 1.0)))
      throw std::invalid_argument("rl.learning_rate: constant value must lie in (0,1]");
    if (!(epsilon.initial >= 0.0) || !(epsilon.initial <= 1.0))
      throw std::invalid_argument("rl.epsilon0: must lie in [0,1]");
    if (!(epsilon.floor >= 0.0) || !(epsilon.floor <= 1.0))
      throw std::invalid_argument("rl.epsilon_min: must lie in [0,1]");
    if (!(epsilon.tau > 0.0)) throw std::invalid_argument("rl.epsilon_tau: must be > 0");
    if (curve_stride < 1) throw std::invalid_argument("rl.curve_stride: must be >= 1");
    grid.validate();
  }
};

/// Stock schedule for a run of the given length: epsilon 1 -> 0.01 with
/// tau = T/5, visit-count learning rate, undiscounted, zero-initialized table.
inline QLearnConfig default_qlearn_config(std::int64_t episodes) {
  QLearnConfig config;
  config.episodes = episodes;
  config.epsilon.tau = static_cast<double>(episodes) / 5.0;
  if (episodes == 0) config.epsilon.tau = 1.0;
  return config;
}

/// Exploration rate at (0-based) episode t: max(eps_min, eps0 e^{-t/tau}).
inline double epsilon_value(const QLearnConfig& config, std::int64_t t) {
  return std::max(config.epsilon.floor,
                  config.epsilon.initial *
                      std::exp(-static_cast<double>(t) / config.epsilon.tau));
}

/// Epsilon-greedy selection over action indices 0..n_actions-1.
inline int select_action(const QTable& table, const HistoryState& state, int n_actions,
                         double epsilon, RngStream& rng) {
  if (n_actions < 1) throw std::invalid_argument("select_action: empty action set");
  if (rng.uniform() < epsilon)
    return static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_actions)));
  return table.argmax(state, n_actions);
}

/// One Q-learning backup:
///   Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))
/// with the bootstrap term zero at terminal states (next == nullptr). The
/// visit count is incremented first, so visit-count mode uses 1/N with the
/// post-increment N.
inline void q_update(QTable& table, const HistoryState& state, int action, int n_actions,
                     double reward, const HistoryState* next, int next_actions,
                     const QLearnConfig& config) {
  double bootstrap = 0.0;
  if (next != nullptr)
    bootstrap = config.discount * table.max_value(*next, next_actions);
  QTable::Cell& cell = table.at(state, action, n_actions);
  ++cell.visits;
  const double alpha = config.learning_rate.mode == LearningRate::Mode::constant
                           ? config.learning_rate.constant_value
                           : 1.0 / static_cast<double>(cell.visits);
  cell.value = (1.0 - alpha) * cell.value + alpha * (reward + bootstrap);
}

namespace detail {

inline void extract_greedy(const QTable& table, const QLearnConfig& config,
                           ReceiverStrategy& out, HistoryState& history, int depth,
                           unsigned prefix) {
  const int layers = out.layers;
  if (depth == layers) {
    out.guess_map[prefix] = table.argmax(history, 2);
    return;
  }
  const int n = static_cast<int>(config.grid.values.size());
  const int action = table.argmax(history, n);
  out.displacement(depth, prefix) = config.grid.values[static_cast<std::size_t>(action)];
  for (int outcome = 0; outcome < 2; ++outcome) {
    history.push_action(action);
    history.push_outcome(outcome);
    extract_greedy(table, config, out, history, depth + 1,
                   (prefix << 1) | static_cast<unsigned>(outcome));
    history.items.pop_back();
    history.items.pop_back();
  }
}

}  // namespace detail

/// Deterministic policy encoded by the table: at each history follow the
/// argmax action, package the visited displacements as a strategy tree with
/// an explicit guess map.
inline ReceiverStrategy greedy_strategy(const QTable& table, const QLearnConfig& config,
                                        const std::vector<double>& splits) {
  config.grid.validate();
  if (splits.empty() || splits.back() != 0.0)
    throw std::invalid_argument("greedy_strategy: splits must end with theta_L = 0");
  ReceiverStrategy s;
  s.layers = static_cast<int>(splits.size());
  s.splits = splits;
  s.displacements.assign(tree_size(s.layers), 0.0);
  s.guess = GuessRule::explicit_map;
  s.guess_map.assign(std::size_t{1} << s.layers, 0);
  HistoryState history;
  detail::extract_greedy(table, config, s, history, 0, 0);
  return s;
}

/// Figures of merit per episode: R_t is the running mean reward (every
/// episode); P_t the exact success probability of the current greedy
/// strategy, recorded every `curve_stride` episodes and at the end.
struct LearningCurve {
  std::vector<double> returns;
  std::vector<std::pair<std::int64_t, double>> greedy_success;

  double final_greedy_success() const {
    return greedy_success.empty() ? 0.0 : greedy_success.back().second;
  }
};

struct TrainResult {
  QTable table{0.0};
  LearningCurve curve;
};

/// Model-free calibration loop: T episodes of sample_episode driven by the
/// epsilon-greedy policy over history states, Q backup applied to every step
/// (layer actions earn 0, the guess earns the terminal reward).
inline TrainResult train(const SignalSource& source, const ChannelEnsemble& channel,
                         const std::vector<double>& splits, const QLearnConfig& config,
                         RngStream& rng) {
  config.validate();
  source.validate();
  channel.validate();
  if (splits.empty() || splits.back() != 0.0)
    throw std::invalid_argument("train: splits must end with theta_L = 0");

  const int n_grid = static_cast<int>(config.grid.values.size());

  TrainResult result{QTable(config.q_init), {}};
  QTable& table = result.table;

  struct Step {
    HistoryState state;
    int action = 0;
    int n_actions = 0;
  };
  std::vector<Step> trajectory;
  HistoryState history;
  double epsilon = 0.0;

  EpisodePolicy policy;
  policy.displacement = [&](const std::vector<int>& outcomes) {
    if (history.expects_outcome()) history.push_outcome(outcomes.back());
    const int action = select_action(table, history, n_grid, epsilon, rng);
    trajectory.push_back({history, action, n_grid});
    history.push_action(action);
    return config.grid.values[static_cast<std::size_t>(action)];
  };
  policy.guess = [&](const std::vector<int>& outcomes) {
    history.push_outcome(outcomes.back());
    const int action = select_action(table, history, 2, epsilon, rng);
    trajectory.push_back({history, action, 2});
    history.push_action(action);
    return action;
  };

  result.curve.returns.reserve(static_cast<std::size_t>(config.episodes));
  std::int64_t total_reward = 0;

  for (std::int64_t t = 0; t < config.episodes; ++t) {
    epsilon = epsilon_value(config, t);
    history.items.clear();
    trajectory.clear();

    const EpisodeRecord record = sample_episode(source, channel, splits, policy, rng);
    total_reward += record.reward;

    for (std::size_t k = 0; k < trajectory.size(); ++k) {
      const bool last = k + 1 == trajectory.size();
      const double reward = last ? static_cast<double>(record.reward) : 0.0;
      const HistoryState* next = last ? nullptr : &trajectory[k + 1].state;
      const int next_actions = last ? 0 : trajectory[k + 1].n_actions;
      q_update(table, trajectory[k].state, trajectory[k].action, trajectory[k].n_actions,
               reward, next, next_actions, config);
    }

    result.curve.returns.push_back(static_cast<double>(total_reward) /
                                   static_cast<double>(t + 1));
    if ((t + 1) % config.curve_stride == 0 || t + 1 == config.episodes) {
      const ReceiverStrategy greedy = greedy_strategy(table, config, splits);
      result.curve.greedy_success.emplace_back(
          t + 1, success_probability(greedy, source, channel));
    }
  }
  return result;
}

/// Running mean of the per-episode rewards: element t = (sum_{i<=t} r_i) / t.
inline std::vector<double> cumulative_return(const std::vector<int>& rewards) {
  if (rewards.empty())
    throw std::invalid_argument("cumulative_return: rewards must be nonempty");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    acc += rewards[t];
    out[t] = acc / static_cast<double>(t + 1);
  }
  return out;
}

}  // namespace fadeopt
