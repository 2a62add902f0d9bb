#pragma once

#include "fadeopt/receivers.hpp"
#include "fadeopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fadeopt {

struct AnnealConfig {
  double initial_temperature = 0.1;
  double cooling_rate = 0.98;
  int steps_per_temperature = 200;
  double proposal_stddev = 0.1;
  double temperature_floor = 1e-5;
  int restarts = 8;
  bool optimize_splits = false;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(initial_temperature > 0.0))
      throw std::invalid_argument("anneal.initial_temperature: must be > 0");
    if (!(cooling_rate > 0.0) || !(cooling_rate < 1.0))
      throw std::invalid_argument("anneal.cooling_rate: must lie in (0,1)");
    if (steps_per_temperature < 1)
      throw std::invalid_argument("anneal.steps_per_temperature: must be >= 1");
    if (!(proposal_stddev > 0.0))
      throw std::invalid_argument("anneal.proposal_stddev: must be > 0");
    if (!(temperature_floor > 0.0))
      throw std::invalid_argument("anneal.temperature_floor: must be > 0");
    if (restarts < 1) throw std::invalid_argument("anneal.restarts: must be >= 1");
  }
};

struct DisplacementGrid {
  std::vector<double> values;

  static DisplacementGrid linspace(double lo, double hi, int n) {
    DisplacementGrid g;
    g.values.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      g.values[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1.0);
    return g;
  }

  void validate() const {
    if (values.empty()) throw std::invalid_argument("grid.values: must be nonempty");
    for (std::size_t k = 1; k < values.size(); ++k)
      if (!(values[k] > values[k - 1]))
        throw std::invalid_argument("grid.values: must be strictly increasing");
  }
};

struct AnnealLogRow {
  int restart = 0;
  std::int64_t step = 0;
  double temperature = 0.0;
  double current = 0.0;
  double best = 0.0;
};

struct AnnealResult {
  ReceiverStrategy strategy;
  double value = 0.0;
};

namespace detail {

inline ReceiverStrategy make_strategy(int layers, std::vector<double> splits,
                                      std::vector<double> displacements) {
  ReceiverStrategy s;
  s.layers = layers;
  s.splits = std::move(splits);
  s.displacements = std::move(displacements);
  s.guess = GuessRule::maximum_likelihood;
  return s;
}

}  // namespace detail

/// Simulated annealing over the displacement tree (and, optionally, the free
/// beam-splitter transmissivities) of an L-layer receiver, maximizing the
/// exact ML success probability. Proposals perturb one randomly chosen
/// parameter by a Gaussian step; displacements are clamped to
/// [-3a, 3a], splits to [0,1]. Uphill moves are always accepted, downhill
/// ones with probability exp(dP / T). Restart r draws from stream
/// (config.seed, r); the best strategy across restarts wins, earlier restarts
/// winning ties, so the result is deterministic for a given seed.
///
/// When warm_start is given, restart 0 starts from it (it must have the same
/// layer count) instead of a random tree; its value participates in
/// best-so-far tracking, so the returned value can never fall below it.
inline AnnealResult anneal_displacements(const SignalSource& source,
                                         const ChannelEnsemble& channel, int layers,
                                         std::vector<double> splits,
                                         const AnnealConfig& config,
                                         std::vector<AnnealLogRow>* log = nullptr,
                                         const ReceiverStrategy* warm_start = nullptr) {
  config.validate();
  source.validate();
  channel.validate();
  if (layers < 1) throw std::invalid_argument("anneal: layers must be >= 1");
  if (splits.size() != static_cast<std::size_t>(layers) || splits.back() != 0.0)
    throw std::invalid_argument("anneal: splits must have layers entries with theta_L = 0");
  if (warm_start && warm_start->layers != layers)
    throw std::invalid_argument("anneal: warm start has wrong layer count");

  const double bound = 3.0 * source.amplitude;
  const std::size_t n_disp = tree_size(layers);
  // Free split parameters: theta_1..theta_{L-1}; theta_L stays pinned at 0.
  const std::size_t n_splits = config.optimize_splits ? static_cast<std::size_t>(layers - 1) : 0;
  const std::size_t n_params = n_disp + n_splits;

  AnnealResult best;
  bool have_best = false;

  for (int restart = 0; restart < config.restarts; ++restart) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(restart));

    ReceiverStrategy current;
    if (warm_start && restart == 0) {
      current = *warm_start;
      current.guess = GuessRule::maximum_likelihood;
      current.guess_map.clear();
    } else {
      std::vector<double> disp(n_disp);
      for (double& d : disp) d = bound * (2.0 * rng.uniform() - 1.0);
      current = detail::make_strategy(layers, splits, std::move(disp));
    }
    double current_value = success_probability(current, source, channel);

    ReceiverStrategy restart_best = current;
    double restart_best_value = current_value;

    std::int64_t step = 0;
    for (double temperature = config.initial_temperature;
         temperature >= config.temperature_floor;
         temperature *= config.cooling_rate) {
      for (int k = 0; k < config.steps_per_temperature; ++k, ++step) {
        ReceiverStrategy proposal = current;
        const std::size_t pick = n_params == 1 ? 0 : rng.uniform_below(n_params);
        if (pick < n_disp) {
          double& d = proposal.displacements[pick];
          d = std::clamp(d + config.proposal_stddev * rng.gaussian(), -bound, bound);
        } else {
          double& t = proposal.splits[pick - n_disp];
          t = std::clamp(t + config.proposal_stddev * rng.gaussian(), 0.0, 1.0);
        }
        const double proposal_value = success_probability(proposal, source, channel);
        const double delta = proposal_value - current_value;
        if (delta >= 0.0 || rng.uniform() < std::exp(delta / temperature)) {
          current = std::move(proposal);
          current_value = proposal_value;
        }
        if (current_value > restart_best_value) {
          restart_best = current;
          restart_best_value = current_value;
        }
        if (log && step % config.steps_per_temperature == 0)
          log->push_back({restart, step, temperature, current_value,
                          std::max(restart_best_value,
                                   have_best ? best.value : restart_best_value)});
      }
    }

    if (!have_best || restart_best_value > best.value) {
      best.strategy = std::move(restart_best);
      best.value = restart_best_value;
      have_best = true;
    }
  }
  return best;
}

struct GridSearchResult {
  ReceiverStrategy strategy;
  double value = 0.0;
  std::uint64_t evaluated = 0;
};

/// Exhaustive enumeration of every displacement tree over the grid, exact ML
/// evaluation of each. Trees are enumerated in lexicographic node order with
/// grid values ascending, and only strict improvements are kept, so ties
/// resolve to the lexicographically smallest tree.
inline GridSearchResult grid_search(const SignalSource& source,
                                    const ChannelEnsemble& channel,
                                    const DisplacementGrid& grid, int layers,
                                    std::vector<double> splits) {
  grid.validate();
  source.validate();
  channel.validate();
  if (layers < 1) throw std::invalid_argument("grid_search: layers must be >= 1");
  const std::size_t n_disp = tree_size(layers);
  const double n_configs = std::pow(static_cast<double>(grid.values.size()),
                                    static_cast<double>(n_disp));
  if (n_configs > 1e7)
    throw std::invalid_argument("grid_search: search space exceeds 1e7 configurations");

  ReceiverStrategy candidate =
      detail::make_strategy(layers, std::move(splits), std::vector<double>(n_disp, 0.0));

  GridSearchResult result;
  std::vector<std::size_t> index(n_disp, 0);
  bool done = false;
  bool first = true;
  while (!done) {
    for (std::size_t k = 0; k < n_disp; ++k)
      candidate.displacements[k] = grid.values[index[k]];
    const double value = success_probability(candidate, source, channel);
    ++result.evaluated;
    if (first || value > result.value) {
      result.strategy = candidate;
      result.value = value;
      first = false;
    }
    // odometer increment, last node fastest
    std::size_t pos = n_disp;
    while (pos > 0) {
      --pos;
      if (++index[pos] < grid.values.size()) break;
      index[pos] = 0;
      if (pos == 0) done = true;
    }
  }
  return result;
}

}  // namespace fadeopt
