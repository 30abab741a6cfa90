#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dbkd::cli {

/// Snapshot of one command invocation, written next to its output.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  bool partial = false;
  nlohmann::json errors = nlohmann::json::array();
  nlohmann::json timings = nlohmann::json::object();
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  std::string started_utc;

  RunManifest();
  nlohmann::json to_json() const;
};

std::filesystem::path manifest_path(const std::filesystem::path& output);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& content);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& output);

}  // namespace dbkd::cli
