#pragma once

// Test-time text augmentation F(x, n): one EDA operation per draw (synonym
// replacement, random insertion, random swap or random deletion) with an
// edit rate alpha drawn from a half-normal distribution.
//
// F is a pure function of (x, n, config): draw n seeds its own generator
// with derive_seed(config.seed, n), so draws can be computed in any order.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dbkd/core.hpp"
#include "dbkd/random.hpp"

namespace dbkd {

/// ASCII lower-casing; other bytes pass through unchanged.
std::string ascii_lower(std::string_view s);

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::set<std::string> words);

  /// Small built-in English list.
  static StopwordSet english();
  /// One word per line; blank lines and lines starting with '#' are ignored.
  static StopwordSet parse(std::istream& in);
  static StopwordSet load(const std::filesystem::path& path);

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

/// Lower-case word -> synonyms. A word never maps only to itself.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  /// Adds synonyms for `word`, dropping the word itself and duplicates.
  /// Throws ContractError when nothing is left.
  void add(std::string_view word, const std::vector<std::string>& synonyms);

  /// `word<TAB>syn1,syn2,...` per line. Blank lines and '#' comments skipped.
  static SynonymLexicon parse(std::istream& in);
  static SynonymLexicon load(const std::filesystem::path& path);

  /// Synonyms of `word` (looked up lower-cased), or nullptr.
  const std::vector<std::string>* synonyms(std::string_view word) const;
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

struct Token {
  std::string text;
  bool is_stopword = false;

  friend bool operator==(const Token&, const Token&) = default;
};

class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  /// Whitespace split; punctuation stays attached to its word.
  static TokenSequence tokenize(std::string_view text,
                                const StopwordSet& stopwords);

  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::vector<Token>& tokens() noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::vector<std::string> texts() const;
  /// Tokens joined by single spaces.
  std::string join() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<Token> tokens_;
};

struct AugmentConfig {
  /// Mean of the half-normal edit rate.
  double alpha_expectation = 0.1;
  std::uint64_t seed = 0;
  std::shared_ptr<const SynonymLexicon> lexicon =
      std::make_shared<SynonymLexicon>();
  std::shared_ptr<const StopwordSet> stopwords =
      std::make_shared<StopwordSet>(StopwordSet::english());

  void validate() const;
};

/// alpha = min(1, |g| * alpha_expectation * sqrt(pi / 2)) with g ~ N(0, 1).
double sample_alpha(const AugmentConfig& cfg, Rng& rng);
double alpha_from_normal(double g, double alpha_expectation);

/// round(alpha * length), half up, and at least 1 when alpha > 0.
std::size_t edit_count(double alpha, std::size_t length);

TokenSequence synonym_replacement(const TokenSequence& x, double alpha,
                                  const AugmentConfig& cfg, Rng& rng);
TokenSequence random_insertion(const TokenSequence& x, double alpha,
                               const AugmentConfig& cfg, Rng& rng);
TokenSequence random_swap(const TokenSequence& x, double alpha,
                          const AugmentConfig& cfg, Rng& rng);
TokenSequence random_deletion(const TokenSequence& x, double alpha,
                              const AugmentConfig& cfg, Rng& rng);

enum class AugmentOp {
  kSynonymReplacement = 0,
  kRandomInsertion = 1,
  kRandomSwap = 2,
  kRandomDeletion = 3,
};
std::string_view to_string(AugmentOp op);

struct AugmentDraw {
  TokenSequence tokens;
  AugmentOp op = AugmentOp::kSynonymReplacement;
  double alpha = 0.0;
};

/// F(x, n) with the operation and alpha that produced it.
AugmentDraw augment_draw(const TokenSequence& x, std::uint64_t n,
                         const AugmentConfig& cfg);
TokenSequence augment(const TokenSequence& x, std::uint64_t n,
                      const AugmentConfig& cfg);

}  // namespace dbkd
