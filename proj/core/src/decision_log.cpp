#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dbkd/teacher.hpp"

namespace dbkd {

using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hash_text(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t parse_hash(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument("bad hash");
  return v;
}

}  // namespace

DecisionLog::DecisionLog(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;  // starts a new log
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      DecisionRecord r{j.at("input_id").get<std::string>(), j.at("n").get<std::uint64_t>(),
                       parse_hash(j.at("hash").get<std::string>()),
                       j.at("label").get<Label>(), j.value("timestamp", "")};
      auto key = std::make_pair(r.input_id, r.n);
      if (!records_.emplace(std::move(key), std::move(r)).second) {
        throw ContractError("duplicate (input_id, n)");
      }
    } catch (const std::exception& e) {
      throw IoError(path_->string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<Label> DecisionLog::find(std::string_view input_id, std::uint64_t n,
                                       std::uint64_t hash) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find({std::string(input_id), n});
  if (it == records_.end()) return std::nullopt;
  if (it->second.hash != hash) {
    throw ContractError("decision log entry for (" + std::string(input_id) + ", " +
                        std::to_string(n) +
                        ") was recorded for different text or a different oracle");
  }
  return it->second.label;
}

void DecisionLog::append(DecisionRecord record) {
  if (record.timestamp.empty()) record.timestamp = utc_now();
  std::lock_guard lock(mutex_);
  auto key = std::make_pair(record.input_id, record.n);
  if (records_.count(key)) {
    throw ContractError("decision log already has (" + record.input_id + ", " +
                        std::to_string(record.n) + ")");
  }
  if (path_) {
    std::ofstream out(*path_, std::ios::app);
    out << json{{"input_id", record.input_id}, {"n", record.n},
                {"hash", hash_text(record.hash)}, {"label", record.label},
                {"timestamp", record.timestamp}}
               .dump()
        << '\n';
    if (!out.flush()) throw IoError("cannot append to " + path_->string());
  }
  records_.emplace(std::move(key), std::move(record));
}

std::size_t DecisionLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<DecisionRecord> DecisionLog::records() const {
  std::lock_guard lock(mutex_);
  std::vector<DecisionRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, r] : records_) out.push_back(r);
  return out;
}

}  // namespace dbkd
