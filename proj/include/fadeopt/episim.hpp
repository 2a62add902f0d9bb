#pragma once

#include "fadeopt/receivers.hpp"
#include "fadeopt/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fadeopt {

/// One simulated transmission: sampled bit and channel branch, the
/// displacements and guess the policy chose, the detector outcomes, and the
/// binary reward (guess == true bit).
struct EpisodeRecord {
  int true_bit = 0;
  int channel_index = 0;
  std::vector<double> displacements;
  std::vector<int> outcomes;
  int guess = 0;
  int reward = 0;
};

/// Caller-supplied receiver control: `displacement` is queried once per layer
/// with the outcomes observed so far, `guess` once with the full outcome
/// string.
struct EpisodePolicy {
  std::function<double(const std::vector<int>&)> displacement;
  std::function<int(const std::vector<int>&)> guess;
};

/// Samples one episode of the physical experiment: bit ~ priors, channel
/// branch ~ ensemble (drawn once and reused for every layer), then each layer
/// detector clicks with p(1) = 1 - e^{-(alpha - beta)^2}. Every random choice
/// is an inverse-CDF lookup on one uniform draw.
inline EpisodeRecord sample_episode(const SignalSource& source,
                                    const ChannelEnsemble& channel,
                                    const std::vector<double>& splits,
                                    const EpisodePolicy& policy, RngStream& rng) {
  source.validate();
  channel.validate();
  if (splits.empty() || splits.back() != 0.0)
    throw std::invalid_argument("sample_episode: splits must end with theta_L = 0");
  if (!policy.displacement || !policy.guess)
    throw std::invalid_argument("sample_episode: policy callbacks must be set");

  EpisodeRecord record;
  record.true_bit = rng.uniform() < source.prior0 ? 0 : 1;
  record.channel_index = rng.uniform() < channel.branches[0].probability ? 0 : 1;

  const double eta =
      channel.branches[static_cast<std::size_t>(record.channel_index)].transmissivity;
  const double input = std::sqrt(eta) * source.alpha(record.true_bit);
  const auto fractions = layer_fractions(splits);

  for (std::size_t l = 0; l < splits.size(); ++l) {
    const double beta = policy.displacement(record.outcomes);
    if (!std::isfinite(beta))
      throw std::invalid_argument("sample_episode: policy returned a non-finite displacement");
    record.displacements.push_back(beta);
    const double p0 = detector_probability(input * fractions[l], beta).first;
    record.outcomes.push_back(rng.uniform() < p0 ? 0 : 1);
  }

  record.guess = policy.guess(record.outcomes);
  if (record.guess != 0 && record.guess != 1)
    throw std::invalid_argument("sample_episode: policy guess must be 0 or 1");
  record.reward = record.guess == record.true_bit ? 1 : 0;
  return record;
}

/// Policy that plays a fixed strategy: displacements from its tree, guesses
/// from its explicit map or from the precomputed ML rule.
inline EpisodePolicy strategy_policy(const ReceiverStrategy& strategy,
                                     const SignalSource& source,
                                     const ChannelEnsemble& channel) {
  strategy.validate();
  std::vector<int> guesses;
  if (strategy.guess == GuessRule::explicit_map) {
    guesses = strategy.guess_map;
  } else {
    const OutcomeDistribution dist = outcome_distribution(strategy, source, channel);
    const std::size_t n = std::size_t{1} << strategy.layers;
    guesses.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      guesses[j] = source.prior0 * dist.prob[0][j] >= source.prior1 * dist.prob[1][j] ? 0 : 1;
  }
  auto tree = strategy.displacements;
  return EpisodePolicy{
      [tree](const std::vector<int>& outcomes) {
        unsigned prefix = 0;
        for (int bit : outcomes) prefix = (prefix << 1) | static_cast<unsigned>(bit);
        return tree[tree_index(static_cast<int>(outcomes.size()), prefix)];
      },
      [guesses](const std::vector<int>& outcomes) {
        unsigned j = 0;
        for (int bit : outcomes) j = (j << 1) | static_cast<unsigned>(bit);
        return guesses[j];
      }};
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::int64_t episodes = 0;
};

/// Empirical success frequency of a fixed strategy over `episodes` simulated
/// transmissions, with the binomial standard error sqrt(p(1-p)/n).
inline MonteCarloEstimate monte_carlo_success(const ReceiverStrategy& strategy,
                                              const SignalSource& source,
                                              const ChannelEnsemble& channel,
                                              std::int64_t episodes, RngStream& rng) {
  if (episodes < 1)
    throw std::invalid_argument("monte_carlo_success: episodes must be >= 1");
  const EpisodePolicy policy = strategy_policy(strategy, source, channel);
  std::int64_t wins = 0;
  for (std::int64_t t = 0; t < episodes; ++t)
    wins += sample_episode(source, channel, strategy.splits, policy, rng).reward;
  MonteCarloEstimate mc;
  mc.episodes = episodes;
  mc.estimate = static_cast<double>(wins) / static_cast<double>(episodes);
  mc.standard_error = std::sqrt(mc.estimate * (1.0 - mc.estimate) /
                                static_cast<double>(episodes));
  return mc;
}

}  // namespace fadeopt
