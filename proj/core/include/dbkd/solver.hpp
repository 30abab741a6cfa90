#pragma once

// Fixed-point estimation of logits from a decision distribution.
//
// Starting from z = 0 the iteration
//
//   z <- z + damping * (P~ - Q(z))
//
// runs until ||Q(z) - P~||_inf <= epsilon or max_iterations updates have been
// applied. With damping 1 and zero start the iterate stays zero-sum because
// both P~ and Q(z) sum to 1.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>

#include "dbkd/compositions.hpp"
#include "dbkd/core.hpp"
#include "dbkd/decision_model.hpp"

namespace dbkd {

struct SolverConfig {
  double epsilon = 1e-3;
  std::size_t max_iterations = 100;
  double damping = 1.0;
  NoiseScale sigma{1.0};
  QuadratureConfig quadrature{};
  /// Add 1/(2N) to every entry of a counted P~ and renormalize before solving.
  /// Gives one-hot inputs a finite root.
  bool smooth_counts = false;

  void validate() const;
  DecisionModelConfig model() const { return {sigma, quadrature}; }
};

struct SolveResult {
  LogitsVector z_hat{std::vector<double>{0.0, 0.0}};
  bool converged = false;
  /// Number of updates applied to z.
  std::size_t iterations = 0;
  /// ||Q(z_hat) - P~||_inf for the returned z_hat.
  double residual_linf = 0.0;

  friend bool operator==(const SolveResult&, const SolveResult&) = default;
};

SolveResult solve_logits(const DecisionDistribution& p_tilde,
                         const SolverConfig& cfg = {});

/// The target the iteration actually solves for (smoothed or as given).
std::vector<double> solver_target(const DecisionDistribution& p_tilde,
                                  const SolverConfig& cfg);

/// Thrown by lookup() when the table has no entry for the distribution.
class LookupError : public Error {
 public:
  using Error::Error;
};

class LogitsLookupTable {
 public:
  LogitsLookupTable(std::size_t label_count, std::size_t sample_count,
                    SolverConfig config, std::map<Counts, SolveResult> entries);

  std::size_t label_count() const noexcept { return label_count_; }
  std::size_t sample_count() const noexcept { return sample_count_; }
  const SolverConfig& config() const noexcept { return config_; }
  const std::map<Counts, SolveResult>& entries() const noexcept {
    return entries_;
  }
  std::size_t size() const noexcept { return entries_.size(); }

  const SolveResult* find(const Counts& counts) const;

 private:
  std::size_t label_count_;
  std::size_t sample_count_;
  SolverConfig config_;
  std::map<Counts, SolveResult> entries_;
};

/// Solves one representative per sorted count multiset and permutes it into
/// every composition. `jobs` worker threads (0 = hardware concurrency).
LogitsLookupTable build_lookup_table(LabelSpace labels, std::size_t n,
                                     const SolverConfig& cfg,
                                     std::size_t jobs = 1);

/// Exact retrieval by counts. Throws LookupError on a sample-count or
/// dimension mismatch and for distributions without counts.
const SolveResult& lookup(const LogitsLookupTable& table,
                          const DecisionDistribution& p_tilde);

inline constexpr int kLookupTableFormatVersion = 1;

/// JSON with a header and one entry per composition, in key order.
/// Doubles are written in shortest round-trip form, so load(save(t)) == t.
void save_lookup_table(const LogitsLookupTable& table,
                       const std::filesystem::path& path);
LogitsLookupTable load_lookup_table(const std::filesystem::path& path);

}  // namespace dbkd
