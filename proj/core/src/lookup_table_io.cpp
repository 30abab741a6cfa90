#include <fstream>

#include <nlohmann/json.hpp>

#include "dbkd/solver.hpp"

namespace dbkd {

using nlohmann::json;

namespace {

json header_json(const LogitsLookupTable& t) {
  const SolverConfig& c = t.config();
  return {
      {"version", kLookupTableFormatVersion},
      {"L", t.label_count()},
      {"N", t.sample_count()},
      {"sigma", c.sigma.value()},
      {"epsilon", c.epsilon},
      {"max_iterations", c.max_iterations},
      {"damping", c.damping},
      {"smooth_counts", c.smooth_counts},
      {"quadrature",
       {{"nodes_per_level", c.quadrature.nodes_per_level},
        {"upper_cut", c.quadrature.upper_cut},
        {"tolerance", c.quadrature.tolerance}}},
  };
}

}  // namespace

void save_lookup_table(const LogitsLookupTable& table,
                       const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& [counts, r] : table.entries()) {
    entries.push_back({{"counts", counts},
                       {"z_hat", r.z_hat.to_vector()},
                       {"converged", r.converged},
                       {"iterations", r.iterations},
                       {"residual", r.residual_linf}});
  }
  json doc = header_json(table);
  doc["entries"] = std::move(entries);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(1) << '\n';
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

LogitsLookupTable load_lookup_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kLookupTableFormatVersion) {
      throw IoError(path.string() + ": unsupported table version " +
                    std::to_string(version));
    }
    SolverConfig cfg;
    cfg.sigma = NoiseScale(doc.at("sigma").get<double>());
    cfg.epsilon = doc.at("epsilon").get<double>();
    cfg.max_iterations = doc.at("max_iterations").get<std::size_t>();
    cfg.damping = doc.at("damping").get<double>();
    cfg.smooth_counts = doc.value("smooth_counts", false);
    const json& q = doc.at("quadrature");
    cfg.quadrature.nodes_per_level = q.at("nodes_per_level").get<std::size_t>();
    cfg.quadrature.upper_cut = q.at("upper_cut").get<double>();
    cfg.quadrature.tolerance = q.at("tolerance").get<double>();
    cfg.validate();

    std::map<Counts, SolveResult> entries;
    for (const json& e : doc.at("entries")) {
      SolveResult r;
      r.z_hat = LogitsVector(e.at("z_hat").get<std::vector<double>>());
      r.converged = e.at("converged").get<bool>();
      r.iterations = e.at("iterations").get<std::size_t>();
      r.residual_linf = e.at("residual").get<double>();
      entries.emplace(e.at("counts").get<Counts>(), std::move(r));
    }
    return LogitsLookupTable(doc.at("L").get<std::size_t>(),
                             doc.at("N").get<std::size_t>(), cfg,
                             std::move(entries));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed lookup table: " + e.what());
  } catch (const ContractError& e) {
    throw IoError(path.string() + ": invalid lookup table: " + e.what());
  }
}

}  // namespace dbkd
