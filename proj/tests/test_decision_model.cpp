#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dbkd/decision_model.hpp"
#include "oracles.hpp"

using namespace dbkd;

TEST(BuildDifferenceProblem, Examples) {
  {
    const auto p = build_difference_problem(LogitsVector({0, 0, 0}), 0, NoiseScale(1));
    EXPECT_EQ(std::vector<double>(p.mu().begin(), p.mu().end()), (std::vector<double>{0, 0}));
    EXPECT_EQ(p.cov(), (SquareMatrix{{2, 1}, {1, 2}}));
  }
  {
    const auto p = build_difference_problem(LogitsVector({3, 1}), 0, NoiseScale(2));
    EXPECT_EQ(std::vector<double>(p.mu().begin(), p.mu().end()), (std::vector<double>{2}));
    EXPECT_EQ(p.cov(), (SquareMatrix{{8}}));
  }
  {
    const auto p = build_difference_problem(LogitsVector({1, 4, 2, 2}), 1, NoiseScale(1));
    EXPECT_EQ(std::vector<double>(p.mu().begin(), p.mu().end()), (std::vector<double>{3, 2, 2}));
    EXPECT_EQ(p.cov(), (SquareMatrix{{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}));
  }
  EXPECT_THROW(build_difference_problem(LogitsVector({1, 2}), 2, NoiseScale(1)), ContractError);
}

TEST(TheoreticalDistribution, EqualLogitsAreUniform) {
  for (std::size_t l = 2; l <= 6; ++l) {
    for (double c : {-3.0, 0.0, 2.5}) {
      const auto q = theoretical_distribution(LogitsVector(std::vector<double>(l, c)));
      for (double p : q.probs()) EXPECT_NEAR(p, 1.0 / l, 1e-6);
    }
  }
}

TEST(TheoreticalDistribution, BivariateClosedForm) {
  const auto q = theoretical_distribution(LogitsVector({1, 0}));
  const double expected = oracle::cdf_simpson(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(q[0], expected, 1e-9);
  EXPECT_NEAR(q[1], 1 - expected, 1e-9);
  EXPECT_NEAR(q[0], 0.76025, 1e-5);
  EXPECT_FALSE(q.sample_count().has_value());
}

TEST(TheoreticalDistribution, ThreeLabelMonteCarlo) {
  const std::vector<double> z{2, 0, -1};
  const auto q = theoretical_distribution(LogitsVector(z));
  const auto mc = oracle::argmax_frequencies(z, 1.0, 2'000'000, 21);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(std::abs(q[i] - mc.p[i]), 3 * mc.se[i]);
}

TEST(TheoreticalDistribution, MatchesMonteCarloAcrossLabelCounts) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (std::size_t l = 2; l <= 6; ++l) {
    std::vector<double> z(l);
    for (double& v : z) v = u(gen);
    const auto q = theoretical_distribution(LogitsVector(z));
    const auto mc = oracle::argmax_frequencies(z, 1.0, 400'000, 100 + l);
    for (std::size_t i = 0; i < l; ++i) {
      EXPECT_LE(std::abs(q[i] - mc.p[i]), 3 * mc.se[i]) << "L=" << l << " i=" << i;
    }
  }
}

TEST(TheoreticalDistribution, RawSumCloseToOne) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t l = 2 + trial % 5;
    std::vector<double> z(l);
    for (double& v : z) v = u(gen);
    DecisionModelConfig cfg;
    const auto raw = raw_decision_probabilities(LogitsVector(z), cfg);
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    EXPECT_LE(std::abs(sum - 1.0), 10 * cfg.quadrature.tolerance);
    const auto q = theoretical_distribution(LogitsVector(z), cfg);
    EXPECT_NEAR(std::accumulate(q.probs().begin(), q.probs().end(), 0.0), 1.0, 1e-14);
  }
}

TEST(TheoreticalDistribution, Properties) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t l = 2 + trial % 5;
    std::vector<double> z(l);
    for (double& v : z) v = u(gen);
    const double sigma = 0.5 + (trial % 4) * 0.5;
    DecisionModelConfig cfg{NoiseScale(sigma), {}};
    const auto q = theoretical_distribution(LogitsVector(z), cfg);

    // Translation.
    std::vector<double> shifted = z;
    const double c = u(gen) * 10;
    for (double& v : shifted) v += c;
    const auto qs = theoretical_distribution(LogitsVector(shifted), cfg);
    for (std::size_t i = 0; i < l; ++i) EXPECT_NEAR(q[i], qs[i], 1e-8);

    // Permutation.
    std::vector<std::size_t> perm(l);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> pz(l);
    for (std::size_t i = 0; i < l; ++i) pz[perm[i]] = z[i];
    const auto qp = theoretical_distribution(LogitsVector(pz), cfg);
    for (std::size_t i = 0; i < l; ++i) EXPECT_NEAR(qp[perm[i]], q[i], 1e-8);

    // Argmax consistency.
    EXPECT_EQ(argmax_decision(q.probs()), argmax_decision(z));

    // Scale coupling.
    std::vector<double> scaled = z;
    for (double& v : scaled) v /= sigma;
    const auto q1 = theoretical_distribution(LogitsVector(scaled));
    for (std::size_t i = 0; i < l; ++i) EXPECT_NEAR(q[i], q1[i], 1e-8);
  }
}
