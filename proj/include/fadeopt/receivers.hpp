#pragma once

#include "fadeopt/states.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fadeopt {

enum class GuessRule { maximum_likelihood, explicit_map };

/// Index of the displacement-tree node reached after `depth` outcomes whose
/// bits (first outcome = most significant) form `prefix`.
inline std::size_t tree_index(int depth, unsigned prefix) {
  return (std::size_t{1} << depth) - 1 + prefix;
}

inline std::size_t tree_size(int layers) { return (std::size_t{1} << layers) - 1; }

/// L-layer adaptive receiver: the signal is tapped by beam splitters of
/// transmissivity theta_l (theta_L = 0, so the last layer consumes the
/// remainder), each tap is displaced by an outcome-dependent beta and hits a
/// threshold photodetector. The guess is maximum-likelihood or an explicit
/// map from the full outcome string.
struct ReceiverStrategy {
  int layers = 1;
  std::vector<double> splits;         // theta_1..theta_L, splits.back() == 0
  std::vector<double> displacements;  // complete binary tree, 2^L - 1 nodes
  GuessRule guess = GuessRule::maximum_likelihood;
  std::vector<int> guess_map;         // 2^L entries when guess == explicit_map

  double displacement(int depth, unsigned prefix) const {
    return displacements[tree_index(depth, prefix)];
  }
  double& displacement(int depth, unsigned prefix) {
    return displacements[tree_index(depth, prefix)];
  }

  void validate() const {
    if (layers < 1) throw std::invalid_argument("strategy.layers: must be >= 1");
    if (splits.size() != static_cast<std::size_t>(layers))
      throw std::invalid_argument("strategy.splits: need one transmissivity per layer");
    for (double t : splits)
      if (!(t >= 0.0) || !(t <= 1.0))
        throw std::invalid_argument("strategy.splits: entries must lie in [0,1]");
    if (splits.back() != 0.0)
      throw std::invalid_argument("strategy.splits: last layer must have theta_L = 0");
    if (displacements.size() != tree_size(layers))
      throw std::invalid_argument("strategy.displacements: tree must have 2^L - 1 nodes");
    if (guess == GuessRule::explicit_map &&
        guess_map.size() != (std::size_t{1} << layers))
      throw std::invalid_argument("strategy.guess: explicit map must cover all 2^L outcomes");
    if (guess == GuessRule::explicit_map)
      for (int g : guess_map)
        if (g != 0 && g != 1)
          throw std::invalid_argument("strategy.guess: guesses must be 0 or 1");
  }
};

/// p(j|x) over full outcome strings j (first outcome = most significant bit),
/// for each hypothesis x, averaged over the channel ensemble.
struct OutcomeDistribution {
  int layers = 0;
  std::array<std::vector<double>, 2> prob;
};

/// Fraction of the incoming amplitude detected at each layer:
/// alpha^(l) = sqrt(theta_1 ... theta_{l-1} (1 - theta_l)).
inline std::vector<double> layer_fractions(const std::vector<double>& splits) {
  std::vector<double> frac(splits.size());
  double carried = 1.0;
  for (std::size_t l = 0; l < splits.size(); ++l) {
    frac[l] = std::sqrt(carried * (1.0 - splits[l]));
    carried *= splits[l];
  }
  return frac;
}

/// Amplitudes alpha^(l) seen by the detectors for an input of amplitude
/// sqrt(eta) * a.
inline std::vector<double> layer_amplitudes(const ReceiverStrategy& strategy, double a,
                                            double eta) {
  strategy.validate();
  auto amps = layer_fractions(strategy.splits);
  const double scale = std::sqrt(eta) * a;
  for (double& v : amps) v *= scale;
  return amps;
}

/// Threshold photodetector after displacing by beta:
/// p(no click) = e^{-(alpha - beta)^2}.
inline std::pair<double, double> detector_probability(double alpha_eff, double beta) {
  const double d = alpha_eff - beta;
  const double p0 = std::exp(-d * d);
  return {p0, 1.0 - p0};
}

namespace detail {

/// p(j|x, branch i) for every outcome string j; the channel branch is fixed
/// for the whole string, so the per-layer factors multiply.
inline void branch_outcome_probs(const ReceiverStrategy& strategy,
                                 const std::vector<double>& fractions, double alpha_in,
                                 std::vector<double>& out) {
  const int L = strategy.layers;
  const std::size_t n = std::size_t{1} << L;
  out.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double p = 1.0;
    unsigned prefix = 0;
    for (int l = 0; l < L; ++l) {
      const int bit = static_cast<int>((j >> (L - 1 - l)) & 1u);
      const double alpha = alpha_in * fractions[static_cast<std::size_t>(l)];
      const double beta = strategy.displacement(l, prefix);
      const auto [p0, p1] = detector_probability(alpha, beta);
      p *= bit == 0 ? p0 : p1;
      prefix = (prefix << 1) | static_cast<unsigned>(bit);
    }
    out[j] = p;
  }
}

}  // namespace detail

/// Exact outcome-string distribution per hypothesis. The ensemble average is
/// taken over the joint string: one branch draw per transmission, so outcomes
/// at different layers stay correlated after marginalizing the branch.
inline OutcomeDistribution outcome_distribution(const ReceiverStrategy& strategy,
                                                const SignalSource& source,
                                                const ChannelEnsemble& channel) {
  strategy.validate();
  source.validate();
  channel.validate();
  const std::size_t n = std::size_t{1} << strategy.layers;
  const auto fractions = layer_fractions(strategy.splits);

  OutcomeDistribution dist;
  dist.layers = strategy.layers;
  std::vector<double> branch(n);
  for (int x = 0; x < 2; ++x) {
    dist.prob[static_cast<std::size_t>(x)].assign(n, 0.0);
    for (const auto& b : channel.branches) {
      const double alpha_in = std::sqrt(b.transmissivity) * source.alpha(x);
      detail::branch_outcome_probs(strategy, fractions, alpha_in, branch);
      for (std::size_t j = 0; j < n; ++j)
        dist.prob[static_cast<std::size_t>(x)][j] += b.probability * branch[j];
    }
  }
  return dist;
}

/// Average success probability of the strategy: maximum-likelihood guessing
/// scores sum_j max_x q_x p(j|x); an explicit guess map g scores
/// sum_j q_{g(j)} p(j|g(j)).
inline double success_probability(const ReceiverStrategy& strategy,
                                  const SignalSource& source,
                                  const ChannelEnsemble& channel) {
  const OutcomeDistribution dist = outcome_distribution(strategy, source, channel);
  const std::size_t n = std::size_t{1} << strategy.layers;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w0 = source.prior0 * dist.prob[0][j];
    const double w1 = source.prior1 * dist.prob[1][j];
    if (strategy.guess == GuessRule::maximum_likelihood) {
      total += w0 >= w1 ? w0 : w1;  // ties guess x = 0
    } else {
      total += strategy.guess_map[j] == 0 ? w0 : w1;
    }
  }
  return total;
}

/// Homodyne quadrature measurement with the zero-threshold decision rule:
/// (1 + sum_i pi_i Erf(sqrt(2 eta_i) a)) / 2. Valid for equal priors only.
inline double homodyne_success(const SignalSource& source, const ChannelEnsemble& channel) {
  source.validate();
  channel.validate();
  if (std::abs(source.prior0 - 0.5) > 1e-12)
    throw std::invalid_argument(
        "homodyne_success: zero-threshold rule requires equal priors");
  double acc = 0.0;
  for (const auto& b : channel.branches)
    acc += b.probability * std::erf(std::sqrt(2.0 * b.transmissivity) * source.amplitude);
  return 0.5 * (1.0 + acc);
}

/// Single displacement + threshold detector (L = 1, theta_1 = 0), ML guess.
inline ReceiverStrategy kennedy_strategy(double beta) {
  ReceiverStrategy s;
  s.layers = 1;
  s.splits = {0.0};
  s.displacements = {beta};
  s.guess = GuessRule::maximum_likelihood;
  return s;
}

}  // namespace fadeopt
