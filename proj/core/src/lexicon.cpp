#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "dbkd/augment.hpp"

namespace dbkd {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

// NLTK-style core English stopwords, trimmed to the most frequent ones.
constexpr std::string_view kEnglishStopwords[] = {
    "a",       "about", "above",   "after",  "again", "against", "all",
    "am",      "an",    "and",     "any",    "are",   "as",      "at",
    "be",      "because", "been",  "before", "being", "below",   "between",
    "both",    "but",   "by",      "can",    "did",   "do",      "does",
    "doing",   "down",  "during",  "each",   "few",   "for",     "from",
    "further", "had",   "has",     "have",   "having", "he",     "her",
    "here",    "hers",  "herself", "him",    "himself", "his",   "how",
    "i",       "if",    "in",      "into",   "is",    "it",      "its",
    "itself",  "just",  "me",      "more",   "most",  "my",      "myself",
    "no",      "nor",   "not",     "now",    "of",    "off",     "on",
    "once",    "only",  "or",      "other",  "our",   "ours",    "ourselves",
    "out",     "over",  "own",     "same",   "she",   "should",  "so",
    "some",    "such",  "than",    "that",   "the",   "their",   "theirs",
    "them",    "themselves", "then", "there", "these", "they",   "this",
    "those",   "through", "to",    "too",    "under", "until",   "up",
    "very",    "was",   "we",      "were",   "what",  "when",    "where",
    "which",   "while", "who",     "whom",   "why",   "will",    "with",
    "would",   "you",   "your",    "yours",  "yourself", "yourselves",
};

}  // namespace

StopwordSet::StopwordSet(std::set<std::string> words) {
  for (const auto& w : words) words_.insert(ascii_lower(w));
}

StopwordSet StopwordSet::english() {
  std::set<std::string> words;
  for (std::string_view w : kEnglishStopwords) words.emplace(w);
  return StopwordSet(std::move(words));
}

StopwordSet StopwordSet::parse(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.emplace(w);
  }
  return StopwordSet(std::move(words));
}

StopwordSet StopwordSet::load(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  return parse(in);
}

bool StopwordSet::contains(std::string_view word) const {
  return words_.find(ascii_lower(word)) != words_.end();
}

void SynonymLexicon::add(std::string_view word,
                         const std::vector<std::string>& synonyms) {
  const std::string key = ascii_lower(trim(word));
  if (key.empty()) throw ContractError("lexicon word must not be empty");
  std::vector<std::string>& list = entries_[key];
  for (const std::string& raw : synonyms) {
    const std::string s(trim(raw));
    if (s.empty() || ascii_lower(s) == key) continue;
    if (std::find(list.begin(), list.end(), s) == list.end()) list.push_back(s);
  }
  if (list.empty()) {
    entries_.erase(key);
    throw ContractError("lexicon entry '" + key + "' has no synonym besides itself");
  }
}

SynonymLexicon SynonymLexicon::parse(std::istream& in) {
  SynonymLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos) {
      throw IoError("lexicon line " + std::to_string(line_no) +
                    ": expected word<TAB>synonyms");
    }
    std::vector<std::string> syns;
    std::stringstream list{std::string(body.substr(tab + 1))};
    std::string item;
    while (std::getline(list, item, ',')) syns.push_back(item);
    try {
      lex.add(body.substr(0, tab), syns);
    } catch (const ContractError& e) {
      throw IoError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  return parse(in);
}

const std::vector<std::string>* SynonymLexicon::synonyms(
    std::string_view word) const {
  const auto it = entries_.find(ascii_lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

TokenSequence TokenSequence::tokenize(std::string_view text,
                                      const StopwordSet& stopwords) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string word(text.substr(i, j - i));
      const bool stop = stopwords.contains(word);
      tokens.push_back({std::move(word), stop});
    }
    i = j;
  }
  return TokenSequence(std::move(tokens));
}

std::vector<std::string> TokenSequence::texts() const {
  std::vector<std::string> out;
  out.reserve(tokens_.size());
  for (const Token& t : tokens_) out.push_back(t.text);
  return out;
}

std::string TokenSequence::join() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens_[i].text;
  }
  return out;
}

}  // namespace dbkd
