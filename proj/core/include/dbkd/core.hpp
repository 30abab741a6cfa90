#pragma once

// Shared domain types for decision-based logit estimation.
//
// Labels are 0-based indices into a LabelSpace. All value types validate
// their invariants on construction and are immutable afterwards, so they can
// be shared freely between threads.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbkd {

using Label = std::size_t;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

class LabelSpace {
 public:
  explicit LabelSpace(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  bool contains(Label label) const noexcept { return label < size_; }

  friend bool operator==(LabelSpace, LabelSpace) = default;

 private:
  std::size_t size_;
};

class NoiseScale {
 public:
  explicit NoiseScale(double sigma = 1.0);

  double value() const noexcept { return sigma_; }

  friend bool operator==(NoiseScale, NoiseScale) = default;

 private:
  double sigma_;
};

/// L finite logits. Houses the teacher logits, their estimate and the
/// student logits alike.
class LogitsVector {
 public:
  explicit LogitsVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& to_vector() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  LabelSpace label_space() const { return LabelSpace(values_.size()); }
  double operator[](Label i) const { return values_[i]; }

  friend bool operator==(const LogitsVector&, const LogitsVector&) = default;

 private:
  std::vector<double> values_;
};

/// Probability vector over L labels. When built from N decisions it also
/// remembers the integer counts, which makes it usable as an exact key.
class DecisionDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Validates entries in [0, 1] summing to 1. With a sample count every
  /// entry must be a multiple of 1/N.
  static DecisionDistribution from_probabilities(
      std::vector<double> probs,
      std::optional<std::size_t> sample_count = std::nullopt);

  /// Empirical frequencies of `counts`; sample_count = sum of counts.
  static DecisionDistribution from_counts(std::span<const std::size_t> counts);

  /// Frequency vector of a list of decisions.
  static DecisionDistribution from_decisions(std::span<const Label> decisions,
                                             LabelSpace labels);

  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& to_vector() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  LabelSpace label_space() const { return LabelSpace(probs_.size()); }
  double operator[](Label i) const { return probs_[i]; }

  std::optional<std::size_t> sample_count() const noexcept {
    return sample_count_;
  }
  /// Integer counts; present iff sample_count is.
  std::optional<std::vector<std::size_t>> counts() const;

  bool is_one_hot() const noexcept;

 private:
  DecisionDistribution(std::vector<double> probs,
                       std::optional<std::size_t> sample_count)
      : probs_(std::move(probs)), sample_count_(sample_count) {}

  std::vector<double> probs_;
  std::optional<std::size_t> sample_count_;
};

/// Index of the largest logit; ties go to the lowest index.
Label argmax_decision(const LogitsVector& z);
Label argmax_decision(std::span<const double> values);

DecisionDistribution one_hot(Label d, LabelSpace labels);

}  // namespace dbkd
