#include "dbkd/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dbkd {

void AugmentConfig::validate() const {
  if (!(alpha_expectation > 0.0 && alpha_expectation <= 0.5)) {
    throw ContractError("alpha_expectation must lie in (0, 0.5]");
  }
  if (!lexicon || !stopwords) throw ContractError("augment config needs a lexicon and stopwords");
}

double alpha_from_normal(double g, double alpha_expectation) {
  // A half-normal with scale s has mean s * sqrt(2 / pi).
  const double scale = alpha_expectation * std::sqrt(std::numbers::pi / 2.0);
  return std::min(1.0, std::abs(g) * scale);
}

double sample_alpha(const AugmentConfig& cfg, Rng& rng) {
  return alpha_from_normal(rng.normal(), cfg.alpha_expectation);
}

std::size_t edit_count(double alpha, std::size_t length) {
  if (!(alpha > 0.0) || length == 0) return 0;
  const auto n = static_cast<std::size_t>(
      std::floor(alpha * static_cast<double>(length) + 0.5));
  return std::max<std::size_t>(1, n);
}

namespace {

bool has_synonyms(const Token& t, const SynonymLexicon& lex) {
  return !t.is_stopword && lex.synonyms(t.text) != nullptr;
}

const std::string& pick(const std::vector<std::string>& v, Rng& rng) {
  return v[rng.uniform_index(v.size())];
}

}  // namespace

TokenSequence synonym_replacement(const TokenSequence& x, double alpha,
                                  const AugmentConfig& cfg, Rng& rng) {
  TokenSequence out = x;
  const std::size_t k = edit_count(alpha, x.size());
  if (k == 0) return out;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (has_synonyms(x.tokens()[i], *cfg.lexicon)) candidates.push_back(i);
  }
  // Partial Fisher-Yates: the first k slots become a uniform sample.
  const std::size_t take = std::min(k, candidates.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(candidates[i], candidates[i + rng.uniform_index(candidates.size() - i)]);
    Token& t = out.tokens()[candidates[i]];
    const std::string& syn = pick(*cfg.lexicon->synonyms(t.text), rng);
    t = {syn, cfg.stopwords->contains(syn)};
  }
  return out;
}

TokenSequence random_insertion(const TokenSequence& x, double alpha,
                               const AugmentConfig& cfg, Rng& rng) {
  TokenSequence out = x;
  const std::size_t k = edit_count(alpha, x.size());
  auto& tokens = out.tokens();
  for (std::size_t e = 0; e < k; ++e) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (has_synonyms(tokens[i], *cfg.lexicon)) candidates.push_back(i);
    }
    if (candidates.empty()) break;
    const Token& source = tokens[candidates[rng.uniform_index(candidates.size())]];
    std::string syn = pick(*cfg.lexicon->synonyms(source.text), rng);
    const std::size_t at = rng.uniform_index(tokens.size() + 1);
    const bool stop = cfg.stopwords->contains(syn);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at),
                  Token{std::move(syn), stop});
  }
  return out;
}

TokenSequence random_swap(const TokenSequence& x, double alpha,
                          const AugmentConfig& /*cfg*/, Rng& rng) {
  TokenSequence out = x;
  const std::size_t n = x.size();
  if (n < 2) return out;
  const std::size_t k = edit_count(alpha, n);
  for (std::size_t e = 0; e < k; ++e) {
    const std::size_t i = rng.uniform_index(n);
    std::size_t j = rng.uniform_index(n - 1);
    if (j >= i) ++j;
    std::swap(out.tokens()[i], out.tokens()[j]);
  }
  return out;
}

TokenSequence random_deletion(const TokenSequence& x, double alpha,
                              const AugmentConfig& /*cfg*/, Rng& rng) {
  if (x.empty() || !(alpha > 0.0)) return x;
  std::vector<Token> kept;
  for (const Token& t : x.tokens()) {
    if (!rng.bernoulli(alpha)) kept.push_back(t);
  }
  if (kept.empty()) kept.push_back(x.tokens()[rng.uniform_index(x.size())]);
  return TokenSequence(std::move(kept));
}

std::string_view to_string(AugmentOp op) {
  switch (op) {
    case AugmentOp::kSynonymReplacement: return "synonym_replacement";
    case AugmentOp::kRandomInsertion: return "random_insertion";
    case AugmentOp::kRandomSwap: return "random_swap";
    case AugmentOp::kRandomDeletion: return "random_deletion";
  }
  return "unknown";
}

AugmentDraw augment_draw(const TokenSequence& x, std::uint64_t n,
                         const AugmentConfig& cfg) {
  cfg.validate();
  if (x.empty()) throw ContractError("cannot augment an empty token sequence");
  Rng rng(derive_seed(cfg.seed, n));
  AugmentDraw draw;
  draw.alpha = sample_alpha(cfg, rng);
  draw.op = static_cast<AugmentOp>(rng.uniform_index(4));
  switch (draw.op) {
    case AugmentOp::kSynonymReplacement:
      draw.tokens = synonym_replacement(x, draw.alpha, cfg, rng);
      break;
    case AugmentOp::kRandomInsertion:
      draw.tokens = random_insertion(x, draw.alpha, cfg, rng);
      break;
    case AugmentOp::kRandomSwap:
      draw.tokens = random_swap(x, draw.alpha, cfg, rng);
      break;
    case AugmentOp::kRandomDeletion:
      draw.tokens = random_deletion(x, draw.alpha, cfg, rng);
      break;
  }
  return draw;
}

TokenSequence augment(const TokenSequence& x, std::uint64_t n,
                      const AugmentConfig& cfg) {
  return augment_draw(x, n, cfg).tokens;
}

}  // namespace dbkd
