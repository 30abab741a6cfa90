#include "dbkd/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace dbkd {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ContractError("epsilon must be positive");
  }
  if (max_iterations == 0) throw ContractError("max_iterations must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw ContractError("damping must lie in (0, 1]");
  }
  quadrature.validate();
}

std::vector<double> solver_target(const DecisionDistribution& p_tilde,
                                  const SolverConfig& cfg) {
  std::vector<double> target = p_tilde.to_vector();
  if (cfg.smooth_counts && p_tilde.sample_count()) {
    const double delta = 0.5 / static_cast<double>(*p_tilde.sample_count());
    const double total = 1.0 + delta * static_cast<double>(target.size());
    for (double& t : target) t = (t + delta) / total;
  }
  return target;
}

SolveResult solve_logits(const DecisionDistribution& p_tilde,
                         const SolverConfig& cfg) {
  cfg.validate();
  const std::vector<double> target = solver_target(p_tilde, cfg);
  const std::size_t l = target.size();
  const DecisionModelConfig model = cfg.model();

  std::vector<double> z(l, 0.0);
  SolveResult result;
  while (true) {
    const DecisionDistribution p = theoretical_distribution(LogitsVector(z), model);
    double residual = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      residual = std::max(residual, std::abs(p[j] - target[j]));
    }
    result.residual_linf = residual;
    if (residual <= cfg.epsilon) {
      result.converged = true;
      break;
    }
    if (result.iterations == cfg.max_iterations) break;
    for (std::size_t j = 0; j < l; ++j) z[j] += cfg.damping * (target[j] - p[j]);
    ++result.iterations;
  }
  result.z_hat = LogitsVector(std::move(z));
  return result;
}

LogitsLookupTable::LogitsLookupTable(std::size_t label_count,
                                     std::size_t sample_count,
                                     SolverConfig config,
                                     std::map<Counts, SolveResult> entries)
    : label_count_(label_count), sample_count_(sample_count),
      config_(std::move(config)), entries_(std::move(entries)) {
  LabelSpace labels(label_count);
  (void)labels;
  if (sample_count == 0) throw ContractError("sample count must be >= 1");
  for (const auto& [counts, r] : entries_) {
    if (counts.size() != label_count || r.z_hat.size() != label_count) {
      throw ContractError("lookup table entry has the wrong dimension");
    }
    if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) !=
        sample_count) {
      throw ContractError("lookup table key does not sum to the sample count");
    }
  }
}

const SolveResult* LogitsLookupTable::find(const Counts& counts) const {
  const auto it = entries_.find(counts);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

/// Indices ordering `counts` by decreasing count, ties by index.
std::vector<std::size_t> descending_order(const Counts& counts) {
  std::vector<std::size_t> idx(counts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return counts[a] > counts[b];
  });
  return idx;
}

}  // namespace

LogitsLookupTable build_lookup_table(LabelSpace labels, std::size_t n,
                                     const SolverConfig& cfg, std::size_t jobs) {
  cfg.validate();
  if (n == 0) throw ContractError("sample count must be >= 1");
  const std::size_t l = labels.size();
  const std::vector<Counts> all = enumerate_compositions(n, l);

  std::map<Counts, std::size_t> rep_index;
  std::vector<Counts> reps;
  for (const Counts& c : all) {
    Counts sorted = c;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (rep_index.emplace(sorted, reps.size()).second) reps.push_back(sorted);
  }

  std::vector<std::optional<SolveResult>> solved(reps.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < reps.size(); i = next++) {
      solved[i] = solve_logits(DecisionDistribution::from_counts(reps[i]), cfg);
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, reps.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::map<Counts, SolveResult> entries;
  for (const Counts& c : all) {
    const std::vector<std::size_t> order = descending_order(c);
    Counts sorted(l);
    for (std::size_t r = 0; r < l; ++r) sorted[r] = c[order[r]];
    const SolveResult& base = *solved[rep_index.at(sorted)];
    std::vector<double> z(l);
    for (std::size_t r = 0; r < l; ++r) z[order[r]] = base.z_hat[r];
    SolveResult entry = base;
    entry.z_hat = LogitsVector(std::move(z));
    entries.emplace(c, std::move(entry));
  }
  return LogitsLookupTable(l, n, cfg, std::move(entries));
}

const SolveResult& lookup(const LogitsLookupTable& table,
                          const DecisionDistribution& p_tilde) {
  const auto counts = p_tilde.counts();
  if (!counts) {
    throw LookupError("distribution has no sample count; use solve_logits");
  }
  if (*p_tilde.sample_count() != table.sample_count() ||
      p_tilde.size() != table.label_count()) {
    throw LookupError("table is for L=" + std::to_string(table.label_count()) +
                      ", N=" + std::to_string(table.sample_count()) +
                      " but the distribution has L=" +
                      std::to_string(p_tilde.size()) + ", N=" +
                      std::to_string(*p_tilde.sample_count()) +
                      "; use solve_logits");
  }
  const SolveResult* r = table.find(*counts);
  if (r == nullptr) throw LookupError("no table entry; use solve_logits");
  return *r;
}

}  // namespace dbkd
