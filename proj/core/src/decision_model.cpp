#include "dbkd/decision_model.hpp"

#include <algorithm>
#include <numeric>

namespace dbkd {

SquareMatrix difference_covariance(std::size_t k, NoiseScale sigma) {
  const double s2 = sigma.value() * sigma.value();
  SquareMatrix cov(k, s2);
  for (std::size_t j = 0; j < k; ++j) cov(j, j) = 2.0 * s2;
  return cov;
}

namespace {

std::vector<double> difference_means(std::span<const double> z, Label i) {
  std::vector<double> mu;
  mu.reserve(z.size() - 1);
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j != i) mu.push_back(z[i] - z[j]);
  }
  return mu;
}

}  // namespace

OrthantProblem build_difference_problem(const LogitsVector& z_hat, Label i,
                                        NoiseScale sigma) {
  if (!z_hat.label_space().contains(i)) {
    throw ContractError("label " + std::to_string(i) + " out of range");
  }
  return OrthantProblem(difference_means(z_hat.values(), i),
                        difference_covariance(z_hat.size() - 1, sigma));
}

std::vector<double> raw_decision_probabilities(const LogitsVector& z_hat,
                                               const DecisionModelConfig& cfg) {
  const std::size_t l = z_hat.size();
  // The covariance is exchangeable, so one factor serves every label and the
  // mean can be sorted freely. Sorting makes the result depend only on the
  // multiset of differences, which keeps permuted inputs bit-identical.
  const CholeskyFactor factor = cholesky(difference_covariance(l - 1, cfg.sigma));
  std::vector<double> raw(l);
  for (Label i = 0; i < l; ++i) {
    std::vector<double> mu = difference_means(z_hat.values(), i);
    std::sort(mu.begin(), mu.end());
    raw[i] = orthant_probability(mu, factor, cfg.quadrature);
  }
  return raw;
}

DecisionDistribution theoretical_distribution(const LogitsVector& z_hat,
                                              const DecisionModelConfig& cfg) {
  std::vector<double> p = raw_decision_probabilities(z_hat, cfg);
  // Sum in a label-order-free order for the same reason as above.
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (!(total > 0.0)) throw Error("decision probabilities vanished");
  for (double& x : p) x /= total;
  // Division can leave the sum a few ulps away from 1; that is well inside
  // the distribution tolerance.
  return DecisionDistribution::from_probabilities(std::move(p));
}

}  // namespace dbkd
