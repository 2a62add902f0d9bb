#include "fadeopt/states.hpp"
#include "fadeopt/rng.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fadeopt;
using Catch::Matchers::WithinAbs;

namespace {
const ChannelEnsemble kFigureChannel = ChannelEnsemble::two_point(1.0, 0.01, 0.5);
const SignalSource kFigureSource{0.4, 0.5, 0.5};
}  // namespace

TEST_CASE("coherent overlap") {
  CHECK(coherent_overlap(0.4, 0.4) == 1.0);
  CHECK(coherent_overlap(0.0, 0.0) == 1.0);
  CHECK_THAT(coherent_overlap(0.4, -0.4), WithinAbs(std::exp(-0.32), 1e-15));
  // cross-check the closed form against the truncated Fock inner product
  CHECK_THAT(coherent_overlap(0.4, -0.4),
             WithinAbs(oracles::fock_overlap(0.4, -0.4, 40), 1e-12));
  CHECK_THAT(coherent_overlap(1.3, 0.2),
             WithinAbs(oracles::fock_overlap(1.3, 0.2, 40), 1e-12));

  RngStream rng(17);
  for (int k = 0; k < 50; ++k) {
    const double a = 3.0 * (rng.uniform() - 0.5);
    const double b = 3.0 * (rng.uniform() - 0.5);
    const double shift = 2.0 * (rng.uniform() - 0.5);
    const double v = coherent_overlap(a, b);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    CHECK(v == coherent_overlap(b, a));
    // depends on the amplitudes only through their difference
    CHECK_THAT(coherent_overlap(a + shift, b + shift), WithinAbs(v, 1e-15));
    CHECK(coherent_overlap(-a, -b) == v);
  }
}

TEST_CASE("gram matrix entries and invariants") {
  const GramMatrix g = gram_matrix(kFigureSource, kFigureChannel);

  CHECK_THAT(g.entries(0, 1), WithinAbs(0.7261490370736908, 1e-12));
  CHECK_THAT(g.entries(0, 2), WithinAbs(std::exp(-0.0648), 1e-12));  // |0.4> vs |0.04>
  for (int k = 0; k < 4; ++k) CHECK(g.entries(k, k) == 1.0);

  SECTION("vacuum source gives the all-ones matrix") {
    const GramMatrix g0 = gram_matrix({0.0, 0.5, 0.5}, kFigureChannel);
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) CHECK(g0.entries(m, n) == 1.0);
  }

  SECTION("symmetry, PSD, global sign-flip invariance on random inputs") {
    RngStream rng(99);
    for (int trial = 0; trial < 40; ++trial) {
      const SignalSource src{2.0 * rng.uniform(), 0.5, 0.5};
      const auto channel =
          ChannelEnsemble::two_point(rng.uniform(), rng.uniform(), rng.uniform());
      const GramMatrix gm = gram_matrix(src, channel);
      CHECK((gm.entries - gm.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(gm.entries);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
      // a global sign flip of the amplitudes permutes the states x=0 <-> x=1
      // within each branch and leaves every overlap unchanged
      const auto amps = received_amplitudes(src, channel);
      const int perm[4] = {1, 0, 3, 2};
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          CHECK(coherent_overlap(-amps[static_cast<std::size_t>(m)],
                                 -amps[static_cast<std::size_t>(n)]) ==
                gm.entries(perm[m], perm[n]));
    }
  }
}

TEST_CASE("embedding reproduces the Gram matrix") {
  SECTION("identity") {
    GramMatrix g;
    g.entries = Eigen::Matrix4d::Identity();
    const StateEmbedding b = embedding(g);
    CHECK((b.vectors - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("rank-1 all-ones matrix (vacuum source)") {
    const GramMatrix g = gram_matrix({0.0, 0.5, 0.5}, kFigureChannel);
    const StateEmbedding b = embedding(g);
    CHECK_THAT(b.vectors.trace(), WithinAbs(2.0, 1e-12));  // sqrt of eigenvalue 4
    CHECK((b.vectors.transpose() * b.vectors - g.entries).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("figure operating point") {
    const GramMatrix g = gram_matrix(kFigureSource, kFigureChannel);
    const StateEmbedding b = embedding(g);
    CHECK((b.vectors.transpose() * b.vectors - g.entries).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("rejects a matrix that is not PSD") {
    GramMatrix g;
    g.entries = Eigen::Matrix4d::Identity();
    g.entries(0, 1) = g.entries(1, 0) = 1.5;  // eigenvalue -0.5
    CHECK_THROWS_AS(embedding(g), std::invalid_argument);
  }
}

TEST_CASE("helstrom bound") {
  SECTION("vacuum hypotheses are indistinguishable") {
    CHECK_THAT(helstrom_bound({0.0, 0.5, 0.5}, kFigureChannel), WithinAbs(0.5, 1e-12));
  }
  SECTION("degenerate channel reduces to the pure-state formula") {
    for (double eta : {0.0, 0.01, 0.5, 1.0})
      for (double a : {0.0, 0.2, 0.4, 0.8, 1.2, 2.0}) {
        const SignalSource src{a, 0.5, 0.5};
        const auto channel = ChannelEnsemble::two_point(eta, eta, 0.5);
        CHECK_THAT(helstrom_bound(src, channel),
                   WithinAbs(pure_helstrom(a, eta, 0.5), 1e-10));
      }
    CHECK_THAT(helstrom_bound({0.4, 0.5, 0.5}, ChannelEnsemble::single(1.0)),
               WithinAbs(0.8437686634776909, 1e-12));
  }
  SECTION("agrees with the Fock oracle at the operating point") {
    const double embedded = helstrom_bound(kFigureSource, kFigureChannel);
    const FockHelstrom fock = helstrom_fock_oracle(kFigureSource, kFigureChannel, 30);
    CHECK_FALSE(fock.truncated());
    CHECK_THAT(embedded, WithinAbs(fock.value, 1e-8));
  }
  SECTION("monotone nondecreasing in the amplitude") {
    double prev = 0.0;
    for (int k = 0; k <= 30; ++k) {
      const double a = 0.05 * k;
      const double v = helstrom_bound({a, 0.5, 0.5}, kFigureChannel);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
  SECTION("swapping hypothesis labels leaves the bound unchanged") {
    RngStream rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const double a = 1.5 * rng.uniform();
      const double q0 = rng.uniform();
      const auto channel =
          ChannelEnsemble::two_point(rng.uniform(), rng.uniform(), rng.uniform());
      // label swap: q0 <-> q1 with alpha_0 <-> alpha_1; flipping both is the
      // same problem because signs only enter through pairwise differences
      const double direct = helstrom_bound({a, q0, 1.0 - q0}, channel);
      const double swapped = helstrom_bound({a, 1.0 - q0, q0}, channel);
      CHECK_THAT(direct, WithinAbs(swapped, 1e-12));
    }
  }
  SECTION("result never falls below the better prior") {
    RngStream rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const double q0 = rng.uniform();
      const double v = helstrom_bound({rng.uniform(), q0, 1.0 - q0},
                                      ChannelEnsemble::two_point(
                                          rng.uniform(), rng.uniform(), rng.uniform()));
      CHECK(v >= std::max(q0, 1.0 - q0) - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("fock oracle") {
  SECTION("pure-state point") {
    const FockHelstrom f =
        helstrom_fock_oracle({0.4, 0.5, 0.5}, ChannelEnsemble::single(1.0), 30);
    CHECK_THAT(f.value, WithinAbs(0.8437686634776909, 1e-9));
    CHECK_FALSE(f.truncated());
  }
  SECTION("vacuum") {
    const FockHelstrom f =
        helstrom_fock_oracle({0.0, 0.5, 0.5}, kFigureChannel, 5);
    CHECK_THAT(f.value, WithinAbs(0.5, 1e-12));
  }
  SECTION("undersized truncation is flagged") {
    const FockHelstrom f =
        helstrom_fock_oracle({1.5, 0.5, 0.5}, ChannelEnsemble::single(1.0), 2);
    CHECK(f.truncated());
  }
  SECTION("rejects n_max < 1") {
    CHECK_THROWS_AS(helstrom_fock_oracle(kFigureSource, kFigureChannel, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("pure helstrom closed form") {
  CHECK_THAT(pure_helstrom(0.4, 1.0, 0.5), WithinAbs(0.8437686634776909, 1e-12));
  CHECK_THAT(pure_helstrom(0.0, 1.0, 0.3), WithinAbs(0.7, 1e-12));
  CHECK_THAT(pure_helstrom(0.7, 0.0, 0.3), WithinAbs(0.7, 1e-12));
}

TEST_CASE("input validation") {
  const SignalSource negative_amplitude{-0.1, 0.5, 0.5};
  CHECK_THROWS_AS(negative_amplitude.validate(), std::invalid_argument);
  const SignalSource bad_priors{0.4, 0.6, 0.6};
  CHECK_THROWS_AS(bad_priors.validate(), std::invalid_argument);
  const ChannelEnsemble bad_probabilities = ChannelEnsemble::two_point(1.0, 0.5, 0.7);
  ChannelEnsemble tweaked = bad_probabilities;
  tweaked.branches[1].probability = 0.7;
  CHECK_THROWS_AS(tweaked.validate(), std::invalid_argument);
  const ChannelEnsemble bad_eta = ChannelEnsemble::two_point(1.2, 0.5, 0.5);
  CHECK_THROWS_AS(bad_eta.validate(), std::invalid_argument);
  ChannelEnsemble one_branch;
  one_branch.branches = {{1.0, 1.0}};
  CHECK_THROWS_AS(one_branch.validate(), std::invalid_argument);
}
