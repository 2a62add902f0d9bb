#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fadeopt {

/// BPSK source: hypothesis x in {0,1} is sent as a coherent state of real
/// amplitude (-1)^x * amplitude, with prior q_x.
struct SignalSource {
  double amplitude = 0.4;
  double prior0 = 0.5;
  double prior1 = 0.5;

  double alpha(int bit) const { return bit == 0 ? amplitude : -amplitude; }
  double prior(int bit) const { return bit == 0 ? prior0 : prior1; }

  void validate() const {
    if (!(amplitude >= 0.0))
      throw std::invalid_argument("source.amplitude: must be >= 0");
    if (!(prior0 >= 0.0) || !(prior1 >= 0.0))
      throw std::invalid_argument("source.priors: must be nonnegative");
    if (std::abs(prior0 + prior1 - 1.0) > 1e-12)
      throw std::invalid_argument("source.priors: must sum to 1");
  }
};

struct ChannelBranch {
  double transmissivity = 1.0;
  double probability = 1.0;
};

/// Two-point transmissivity ensemble: the channel applies amplitude damping
/// alpha -> sqrt(eta_i) * alpha with probability pi_i, drawn once per use.
struct ChannelEnsemble {
  std::vector<ChannelBranch> branches;

  static ChannelEnsemble two_point(double eta0, double eta1, double pi0) {
    return ChannelEnsemble{{{eta0, pi0}, {eta1, 1.0 - pi0}}};
  }

  /// Deterministic channel, kept in two-branch form with a zero-weight twin.
  static ChannelEnsemble single(double eta) { return two_point(eta, eta, 1.0); }

  void validate() const {
    if (branches.size() != 2)
      throw std::invalid_argument("channel.branches: exactly 2 required");
    double total = 0.0;
    for (const auto& b : branches) {
      if (!(b.transmissivity >= 0.0) || !(b.transmissivity <= 1.0))
        throw std::invalid_argument("channel.transmissivity: must lie in [0,1]");
      if (!(b.probability >= 0.0) || !(b.probability <= 1.0))
        throw std::invalid_argument("channel.probability: must lie in [0,1]");
      total += b.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("channel.probabilities: must sum to 1");
  }
};

/// <psi_i|psi_j> for the four received states psi_{x+2i} = |sqrt(eta_i) alpha_x>.
struct GramMatrix {
  Eigen::Matrix4d entries;
};

/// Columns of B = sqrt(G): a 4-dimensional representation of the four
/// received states with the same pairwise inner products.
struct StateEmbedding {
  Eigen::Matrix4d vectors;
  Eigen::Vector4d state(int index) const { return vectors.col(index); }
};

/// Overlap <alpha|beta> of two real-amplitude coherent states.
inline double coherent_overlap(double alpha, double beta) {
  const double d = alpha - beta;
  return std::exp(-0.5 * d * d);
}

/// Received amplitudes indexed per the psi_{x+2i} convention.
inline std::array<double, 4> received_amplitudes(const SignalSource& source,
                                                 const ChannelEnsemble& channel) {
  std::array<double, 4> amps{};
  for (int i = 0; i < 2; ++i)
    for (int x = 0; x < 2; ++x)
      amps[static_cast<std::size_t>(x + 2 * i)] =
          std::sqrt(channel.branches[static_cast<std::size_t>(i)].transmissivity) *
          source.alpha(x);
  return amps;
}

inline GramMatrix gram_matrix(const SignalSource& source, const ChannelEnsemble& channel) {
  source.validate();
  channel.validate();
  const auto amps = received_amplitudes(source, channel);
  GramMatrix g;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      g.entries(m, n) = coherent_overlap(amps[static_cast<std::size_t>(m)],
                                         amps[static_cast<std::size_t>(n)]);
  return g;
}

/// Symmetric PSD square root of the Gram matrix via spectral decomposition.
/// Eigenvalues in [-1e-8, 1e-12) are clamped to zero: degenerate channels
/// make G rank-deficient, and the square root would amplify the solver's
/// O(1e-15) noise on the null space to O(1e-8) in the embedding. Zeroing an
/// eigenvalue lambda perturbs reproduced inner products only by O(lambda).
/// Anything below -1e-8 is rejected as not a Gram matrix.
inline StateEmbedding embedding(const GramMatrix& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(g.entries);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("embedding: eigendecomposition failed");
  Eigen::Vector4d lam = solver.eigenvalues();
  for (int k = 0; k < 4; ++k) {
    if (lam(k) < -1e-8)
      throw std::invalid_argument("embedding: Gram matrix has eigenvalue " +
                                  std::to_string(lam(k)) + " < -1e-8");
    if (lam(k) < 1e-12) lam(k) = 0.0;
  }
  StateEmbedding b;
  b.vectors = solver.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
              solver.eigenvectors().transpose();
  return b;
}

/// Maximum success probability of discriminating the two channel-averaged
/// hypotheses rho_x = sum_i pi_i |sqrt(eta_i) alpha_x><...| with any POVM:
/// (1 + ||q0 rho0 - q1 rho1||_1) / 2, trace norm evaluated in the
/// 4-dimensional embedding.
inline double helstrom_bound(const SignalSource& source, const ChannelEnsemble& channel) {
  const StateEmbedding b = embedding(gram_matrix(source, channel));
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 2; ++i) {
    const double pi_i = channel.branches[static_cast<std::size_t>(i)].probability;
    for (int x = 0; x < 2; ++x) {
      const Eigen::Vector4d v = b.state(x + 2 * i);
      const double weight = (x == 0 ? source.prior0 : -source.prior1) * pi_i;
      m += weight * v * v.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(m);
  return 0.5 * (1.0 + solver.eigenvalues().cwiseAbs().sum());
}

struct FockHelstrom {
  double value = 0.0;
  /// Probability mass lost to truncation, before renormalization; values
  /// above 1e-10 mean n_max is too small for the amplitude.
  double truncation_deficit = 0.0;

  bool truncated() const { return truncation_deficit > 1e-10; }
};

/// Independent check of helstrom_bound in the truncated Fock basis: each
/// received state is expanded as e^{-|a|^2/2} a^n / sqrt(n!) up to n_max and
/// renormalized, and the trace norm is taken in that basis.
inline FockHelstrom helstrom_fock_oracle(const SignalSource& source,
                                         const ChannelEnsemble& channel, int n_max = 30) {
  if (n_max < 1) throw std::invalid_argument("helstrom_fock_oracle: n_max must be >= 1");
  source.validate();
  channel.validate();
  const int dim = n_max + 1;
  const auto amps = received_amplitudes(source, channel);

  FockHelstrom result;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < 2; ++i) {
    const double pi_i = channel.branches[static_cast<std::size_t>(i)].probability;
    for (int x = 0; x < 2; ++x) {
      const double alpha = amps[static_cast<std::size_t>(x + 2 * i)];
      Eigen::VectorXd v(dim);
      v(0) = std::exp(-0.5 * alpha * alpha);
      for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
      const double norm2 = v.squaredNorm();
      result.truncation_deficit = std::max(result.truncation_deficit, 1.0 - norm2);
      v /= std::sqrt(norm2);
      const double weight = (x == 0 ? source.prior0 : -source.prior1) * pi_i;
      m += weight * v * v.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  result.value = 0.5 * (1.0 + solver.eigenvalues().cwiseAbs().sum());
  return result;
}

/// Closed-form Helstrom bound for pure BPSK coherent states after a fixed
/// transmissivity eta.
inline double pure_helstrom(double a, double eta, double q0) {
  const double q1 = 1.0 - q0;
  return 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * q0 * q1 * std::exp(-4.0 * eta * a * a)));
}

}  // namespace fadeopt
