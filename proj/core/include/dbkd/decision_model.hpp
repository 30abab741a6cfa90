#pragma once

// Theoretical decision distribution Q(Y | x; z_hat).
//
// With Z ~ N(z_hat, sigma^2 I), label i is the decision when every difference
// U_j = Z_i - Z_j (j != i) is non-negative. U is Gaussian with mean
// z_hat_i - z_hat_j, variance 2 sigma^2 and pairwise covariance sigma^2, so
// each Q(Y = i) is one orthant probability of dimension L - 1.

#include <vector>

#include "dbkd/core.hpp"
#include "dbkd/orthant.hpp"

namespace dbkd {

struct DecisionModelConfig {
  NoiseScale sigma{1.0};
  QuadratureConfig quadrature{};
};

/// Covariance of the L-1 differences: 2 sigma^2 on the diagonal, sigma^2 off it.
SquareMatrix difference_covariance(std::size_t k, NoiseScale sigma);

/// mu_j = z_i - z_j for j < i and z_i - z_{j+1} for j >= i.
OrthantProblem build_difference_problem(const LogitsVector& z_hat, Label i,
                                        NoiseScale sigma);

/// Per-label orthant probabilities before renormalization.
std::vector<double> raw_decision_probabilities(const LogitsVector& z_hat,
                                               const DecisionModelConfig& cfg);

/// raw_decision_probabilities divided by their sum; no sample count.
DecisionDistribution theoretical_distribution(const LogitsVector& z_hat,
                                              const DecisionModelConfig& cfg = {});

}  // namespace dbkd
