#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dbkd/teacher.hpp"

namespace dbkd {

RemoteDecisionClient::RemoteDecisionClient(RemoteConfig config, LabelSpace labels)
    : DecisionOracle(labels), config_(std::move(config)) {
  static const std::regex url(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw ContractError("remote endpoint must look like http://host[:port][/path], got '" +
                        config_.endpoint + "'");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].str();
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/decide";
  if (config_.retries < 0) throw ContractError("retry budget must be >= 0");
  if (config_.token.empty()) {
    if (const char* env = std::getenv(kApiTokenEnvVar)) config_.token = env;
  }
}

std::string RemoteDecisionClient::identity() const {
  return "remote:" + scheme_host_port_ + path_;
}

Label RemoteDecisionClient::decide(std::string_view text, std::uint64_t) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.token.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.token);
  }
  const std::string body = nlohmann::json{{"text", text}}.dump();

  std::string last_failure;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    const auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProtocolError("decision endpoint answered HTTP " +
                          std::to_string(res->status));
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("decision endpoint returned invalid JSON");
    }
    if (!doc.is_object() || !doc.contains("label") ||
        !doc["label"].is_number_integer()) {
      throw ProtocolError("decision endpoint response lacks an integer \"label\"");
    }
    const auto label = doc["label"].get<std::int64_t>();
    if (label < 0) {
      throw ContractError("decision endpoint returned negative label " +
                          std::to_string(label));
    }
    return static_cast<Label>(label);
  }
  throw TransportError("decision endpoint " + identity() + " failed after " +
                       std::to_string(config_.retries + 1) +
                       " attempts: " + last_failure);
}

}  // namespace dbkd
