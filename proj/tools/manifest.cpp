#include "manifest.hpp"

#include <ctime>
#include <fstream>
#include <unistd.h>

#include "dbkd/core.hpp"

namespace dbkd::cli {

RunManifest::RunManifest() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  started_utc = buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json t = timings;
  t["started"] = started_utc;
  t["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {{"tool", "dbkd"},       {"version", DBKD_VERSION}, {"command", command},
          {"argv", argv},         {"config", config},        {"inputs", inputs},
          {"outputs", outputs},   {"seed", seed},            {"partial", partial},
          {"errors", errors},     {"timings", t}};
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return output.string() + ".manifest.json";
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp =
      path.string() + ".tmp." + std::to_string(static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out.flush()) {
      std::filesystem::remove(tmp);
      throw IoError("failed writing " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& output) {
  write_atomically(manifest_path(output), manifest.to_json().dump(2) + "\n");
}

}  // namespace dbkd::cli
