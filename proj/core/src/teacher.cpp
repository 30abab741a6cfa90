#include "dbkd/teacher.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dbkd/random.hpp"

namespace dbkd {

using nlohmann::json;

Label DecisionOracle::query(std::string_view text, std::uint64_t draw_key) {
  const Label d = decide(text, draw_key);
  if (!labels_.contains(d)) {
    throw ContractError("oracle returned label " + std::to_string(d) +
                        " outside [0, " + std::to_string(labels_.size()) + ")");
  }
  ++queries_;
  return d;
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

}  // namespace

GaussianSimTeacher::GaussianSimTeacher(LogitsVector true_logits,
                                       NoiseScale sigma, std::uint64_t seed)
    : DecisionOracle(true_logits.label_space()),
      z_(std::move(true_logits)), sigma_(sigma), seed_(seed) {}

GaussianSimTeacher GaussianSimTeacher::load(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    return GaussianSimTeacher(
        LogitsVector(doc.at("logits").get<std::vector<double>>()),
        NoiseScale(doc.value("sigma", 1.0)), doc.value("seed", std::uint64_t{0}));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string GaussianSimTeacher::identity() const {
  json id = {{"logits", z_.to_vector()}, {"sigma", sigma_.value()}, {"seed", seed_}};
  return "sim:" + id.dump();
}

Label GaussianSimTeacher::decide(std::string_view, std::uint64_t draw_key) {
  Rng rng(derive_seed(seed_, draw_key));
  const double s = sigma_.value();
  Label best = 0;
  double best_v = 0.0;
  for (std::size_t j = 0; j < z_.size(); ++j) {
    const double v = z_[j] + s * rng.normal();
    if (j == 0 || v > best_v) {
      best = j;
      best_v = v;
    }
  }
  return best;
}

BowTextTeacher::BowTextTeacher(std::map<std::string, std::size_t> vocab,
                               std::vector<std::vector<double>> weights,
                               std::vector<double> bias)
    : DecisionOracle(LabelSpace(bias.size())),
      weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.size() != bias_.size()) {
    throw ContractError("bow teacher needs one weight row per label");
  }
  const std::size_t v = weights_.front().size();
  for (const auto& row : weights_) {
    if (row.size() != v) throw ContractError("bow weight rows differ in length");
  }
  for (auto& [word, index] : vocab) {
    if (index >= v) throw ContractError("vocabulary index out of range for '" + word + "'");
    vocab_.emplace(ascii_lower(word), index);
  }
  json canonical = {{"vocab", vocab_}, {"weights", weights_}, {"bias", bias_}};
  fingerprint_ = fnv1a64(canonical.dump());
}

BowTextTeacher BowTextTeacher::load(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    return BowTextTeacher(
        doc.at("vocab").get<std::map<std::string, std::size_t>>(),
        doc.at("weights").get<std::vector<std::vector<double>>>(),
        doc.at("bias").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<double> BowTextTeacher::scores(std::string_view text) const {
  std::vector<double> counts(weights_.front().size(), 0.0);
  std::istringstream words{std::string(text)};
  std::string w;
  while (words >> w) {
    if (auto it = vocab_.find(ascii_lower(w)); it != vocab_.end()) {
      counts[it->second] += 1.0;
    }
  }
  std::vector<double> s = bias_;
  for (std::size_t l = 0; l < s.size(); ++l) {
    for (std::size_t v = 0; v < counts.size(); ++v) s[l] += weights_[l][v] * counts[v];
  }
  return s;
}

std::string BowTextTeacher::identity() const { return "bow:" + hex64(fingerprint_); }

Label BowTextTeacher::decide(std::string_view text, std::uint64_t) {
  return argmax_decision(scores(text));
}

Label query_remote(RemoteDecisionClient& client, std::string_view text) {
  return client.query(text, 0);
}

std::uint64_t decision_hash(std::string_view oracle_identity, std::string_view text) {
  std::string key(oracle_identity);
  key.push_back('\x1f');
  key.append(text);
  return fnv1a64(key);
}

EstimationError::EstimationError(std::size_t draw_index, const std::string& cause)
    : Error("teacher query failed at draw " + std::to_string(draw_index) + ": " + cause),
      draw_index_(draw_index) {}

std::uint64_t draw_key(std::string_view input_id, std::uint64_t n) {
  return derive_seed(fnv1a64(input_id), n);
}

DecisionDistribution estimate_empirical(const TokenSequence& x,
                                        DecisionOracle& oracle, std::size_t n,
                                        const AugmentConfig& cfg,
                                        const EstimateOptions& options) {
  if (n == 0) throw ContractError("estimate_empirical needs N >= 1");
  cfg.validate();
  if (x.empty()) throw ContractError("cannot estimate from an empty input");
  const std::string input_id =
      options.input_id.empty() ? hex64(fnv1a64(x.join())) : options.input_id;
  const std::string identity = oracle.identity();
  const std::size_t first = options.include_original ? 0 : 1;
  const std::size_t draws = n + 1 - first;

  std::vector<Label> decisions(draws);
  std::vector<std::exception_ptr> failures(draws);
  std::atomic<std::size_t> next{0};

  const auto run_draw = [&](std::size_t slot) {
    const std::uint64_t draw = first + slot;
    const std::string text = draw == 0 ? x.join() : augment(x, draw, cfg).join();
    const std::uint64_t hash = decision_hash(identity, text);
    if (options.log) {
      if (auto cached = options.log->find(input_id, draw, hash)) {
        if (!oracle.label_space().contains(*cached)) {
          throw ContractError("cached label out of range");
        }
        decisions[slot] = *cached;
        return;
      }
    }
    const Label d = oracle.query(text, draw_key(input_id, draw));
    decisions[slot] = d;
    if (options.log) options.log->append({input_id, draw, hash, d, {}});
  };
  const auto worker = [&] {
    for (std::size_t slot = next++; slot < draws; slot = next++) {
      try {
        run_draw(slot);
      } catch (...) {
        failures[slot] = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, draws);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  for (std::size_t slot = 0; slot < draws; ++slot) {
    if (!failures[slot]) continue;
    try {
      std::rethrow_exception(failures[slot]);
    } catch (const std::exception& e) {
      throw EstimationError(first + slot, e.what());
    }
  }
  return DecisionDistribution::from_decisions(decisions, oracle.label_space());
}

}  // namespace dbkd
