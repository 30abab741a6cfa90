#pragma once

// Black-box decision oracles and the empirical decision distribution
//
//   P~(Y | x) = (1/N) sum_n onehot(M(F(x, n))).
//
// Every query carries a draw key. Deterministic oracles ignore it; the
// simulated Gaussian teacher uses it to seed its noise so that repeated runs
// see identical decisions.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dbkd/augment.hpp"
#include "dbkd/core.hpp"

namespace dbkd {

class DecisionOracle {
 public:
  explicit DecisionOracle(LabelSpace labels) : labels_(labels) {}
  virtual ~DecisionOracle() = default;
  DecisionOracle(const DecisionOracle&) = delete;
  DecisionOracle& operator=(const DecisionOracle&) = delete;

  LabelSpace label_space() const noexcept { return labels_; }
  /// Successful queries answered so far.
  std::size_t query_count() const noexcept { return queries_.load(); }

  /// Top-1 label for `text`. Thread-safe. Throws ContractError if the
  /// implementation answers outside the label space.
  Label query(std::string_view text, std::uint64_t draw_key);

  /// Stable description of the oracle, part of every cache key.
  virtual std::string identity() const = 0;

 protected:
  // Moving carries the query count along; loaders return by value.
  DecisionOracle(DecisionOracle&& other) noexcept
      : labels_(other.labels_), queries_(other.queries_.load()) {}

  virtual Label decide(std::string_view text, std::uint64_t draw_key) = 0;

 private:
  LabelSpace labels_;
  std::atomic<std::size_t> queries_{0};
};

/// Realizes the Gaussian decision model exactly: each query returns
/// argmax(z + sigma * g) with fresh g ~ N(0, I) seeded by (seed, draw_key).
/// The text is ignored.
class GaussianSimTeacher final : public DecisionOracle {
 public:
  GaussianSimTeacher(LogitsVector true_logits, NoiseScale sigma,
                     std::uint64_t seed);

  /// JSON {"logits": [...], "sigma": s, "seed": k}; sigma defaults to 1 and
  /// seed to 0.
  static GaussianSimTeacher load(const std::filesystem::path& path);

  const LogitsVector& true_logits() const noexcept { return z_; }
  NoiseScale sigma() const noexcept { return sigma_; }
  std::string identity() const override;

 protected:
  Label decide(std::string_view text, std::uint64_t draw_key) override;

 private:
  LogitsVector z_;
  NoiseScale sigma_;
  std::uint64_t seed_;
};

/// Linear bag-of-words classifier: argmax(W * counts + b). Words are
/// lower-cased; out-of-vocabulary words are ignored.
class BowTextTeacher final : public DecisionOracle {
 public:
  BowTextTeacher(std::map<std::string, std::size_t> vocab,
                 std::vector<std::vector<double>> weights,
                 std::vector<double> bias);

  /// JSON {"vocab": {word: index}, "weights": [[...]], "bias": [...]}.
  static BowTextTeacher load(const std::filesystem::path& path);

  std::vector<double> scores(std::string_view text) const;
  std::string identity() const override;

 protected:
  Label decide(std::string_view text, std::uint64_t draw_key) override;

 private:
  std::map<std::string, std::size_t, std::less<>> vocab_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
  std::uint64_t fingerprint_ = 0;
};

/// The endpoint could not be reached or kept failing after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The endpoint answered with something that is not {"label": integer}.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kApiTokenEnvVar = "DBKD_API_TOKEN";

struct RemoteConfig {
  /// Base URL; requests go to POST {endpoint}/decide.
  std::string endpoint;
  std::chrono::milliseconds timeout{10000};
  /// Retries after the first attempt, on transport errors and 5xx answers.
  int retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  /// Bearer token. When empty the DBKD_API_TOKEN environment variable is used.
  std::string token;
};

/// Decision API client speaking {"text": ...} -> {"label": ...}.
class RemoteDecisionClient final : public DecisionOracle {
 public:
  RemoteDecisionClient(RemoteConfig config, LabelSpace labels);

  const RemoteConfig& config() const noexcept { return config_; }
  std::string identity() const override;

 protected:
  Label decide(std::string_view text, std::uint64_t draw_key) override;

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

Label query_remote(RemoteDecisionClient& client, std::string_view text);

struct DecisionRecord {
  std::string input_id;
  std::uint64_t n = 0;
  std::uint64_t hash = 0;
  Label label = 0;
  std::string timestamp;
};

/// Append-only record of teacher answers keyed by (input id, draw index).
/// With a path every append is written through as one JSON line, and
/// existing lines are loaded on construction.
class DecisionLog {
 public:
  DecisionLog() = default;
  explicit DecisionLog(std::filesystem::path path);

  /// The cached label, or nullopt. A record with the same key but a
  /// different content hash throws ContractError: the inputs changed under
  /// an existing log.
  std::optional<Label> find(std::string_view input_id, std::uint64_t n,
                            std::uint64_t hash) const;
  /// Throws ContractError if (input_id, n) is already present.
  void append(DecisionRecord record);

  std::size_t size() const;
  std::vector<DecisionRecord> records() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::uint64_t>, DecisionRecord> records_;
};

/// fnv1a64(oracle identity + '\x1f' + text).
std::uint64_t decision_hash(std::string_view oracle_identity, std::string_view text);

/// Estimation stopped because draw `draw_index` could not be answered.
class EstimationError : public Error {
 public:
  EstimationError(std::size_t draw_index, const std::string& cause);
  std::size_t draw_index() const noexcept { return draw_index_; }

 private:
  std::size_t draw_index_;
};

struct EstimateOptions {
  /// Names the input in the decision log and in the draw keys. Empty means
  /// a hash of the input text.
  std::string input_id;
  /// Also query the unaugmented input (as draw 0), giving N + 1 samples.
  bool include_original = false;
  /// Concurrent oracle queries.
  std::size_t jobs = 1;
  DecisionLog* log = nullptr;
};

/// Draw key for draw n of an input: derive_seed(fnv1a64(input_id), n).
std::uint64_t draw_key(std::string_view input_id, std::uint64_t n);

/// Queries F(x, 1..N) (and x itself when requested) and counts decisions.
DecisionDistribution estimate_empirical(const TokenSequence& x,
                                        DecisionOracle& oracle, std::size_t n,
                                        const AugmentConfig& cfg,
                                        const EstimateOptions& options = {});

}  // namespace dbkd
