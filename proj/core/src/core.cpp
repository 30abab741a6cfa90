#include "dbkd/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dbkd {

LabelSpace::LabelSpace(std::size_t size) : size_(size) {
  if (size < 2) {
    throw ContractError("label space needs at least 2 labels, got " +
                        std::to_string(size));
  }
}

NoiseScale::NoiseScale(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ContractError("noise scale must be positive and finite");
  }
}

LogitsVector::LogitsVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw ContractError("logits vector needs at least 2 entries");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ContractError("logits must be finite");
  }
}

DecisionDistribution DecisionDistribution::from_probabilities(
    std::vector<double> probs, std::optional<std::size_t> sample_count) {
  LabelSpace labels(probs.size());
  (void)labels;
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError("probabilities must lie in [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << "probabilities sum to " << sum << ", expected 1";
    throw ContractError(msg.str());
  }
  if (sample_count) {
    if (*sample_count == 0) throw ContractError("sample count must be >= 1");
    const double n = static_cast<double>(*sample_count);
    for (double& p : probs) {
      const double scaled = p * n;
      const double nearest = std::round(scaled);
      if (std::abs(scaled - nearest) > kSumTolerance * n) {
        throw ContractError(
            "probabilities are not multiples of 1/sample_count");
      }
      // Snap to the exact grid value so equal counts give equal bits.
      p = nearest / n;
    }
  }
  return DecisionDistribution(std::move(probs), sample_count);
}

DecisionDistribution DecisionDistribution::from_counts(
    std::span<const std::size_t> counts) {
  LabelSpace labels(counts.size());
  (void)labels;
  const std::size_t total =
      std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw ContractError("counts must not all be zero");
  std::vector<double> probs(counts.size());
  const double n = static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs[i] = static_cast<double>(counts[i]) / n;
  }
  return DecisionDistribution(std::move(probs), total);
}

DecisionDistribution DecisionDistribution::from_decisions(
    std::span<const Label> decisions, LabelSpace labels) {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (Label d : decisions) {
    if (!labels.contains(d)) {
      throw ContractError("decision " + std::to_string(d) +
                          " outside label space");
    }
    ++counts[d];
  }
  return from_counts(counts);
}

std::optional<std::vector<std::size_t>> DecisionDistribution::counts() const {
  if (!sample_count_) return std::nullopt;
  std::vector<std::size_t> out(probs_.size());
  const double n = static_cast<double>(*sample_count_);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    out[i] = static_cast<std::size_t>(std::llround(probs_[i] * n));
  }
  return out;
}

bool DecisionDistribution::is_one_hot() const noexcept {
  return std::any_of(probs_.begin(), probs_.end(),
                     [](double p) { return p == 1.0; });
}

Label argmax_decision(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax of an empty vector");
  return static_cast<Label>(
      std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

Label argmax_decision(const LogitsVector& z) {
  return argmax_decision(z.values());
}

DecisionDistribution one_hot(Label d, LabelSpace labels) {
  if (!labels.contains(d)) {
    throw ContractError("label " + std::to_string(d) + " out of range for " +
                        std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> counts(labels.size(), 0);
  counts[d] = 1;
  return DecisionDistribution::from_counts(counts);
}

}  // namespace dbkd
