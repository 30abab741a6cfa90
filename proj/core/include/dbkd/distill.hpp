#pragma once

// Soft labels and the distillation objective
//
//   L = L_CE + lambda * KL(softmax(v / tau) || softmax(z / tau)),
//
// plus a small Gaussian-blob harness that distills a rank-limited linear
// student from a simulated decision-only teacher.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dbkd/core.hpp"
#include "dbkd/solver.hpp"

namespace dbkd {

/// softmax(z / tau), computed with max subtraction.
std::vector<double> soft_label(std::span<const double> z, double tau);
std::vector<double> soft_label(const LogitsVector& z, double tau);

/// log softmax(z / tau).
std::vector<double> log_soft_label(std::span<const double> z, double tau);

enum class KlDirection {
  kStudentTeacher,  // KL(student || teacher), as the objective is written
  kTeacherStudent,  // the conventional KD direction
};

struct KdLossConfig {
  double tau = 1.0;
  double lambda = 1.0;
  KlDirection direction = KlDirection::kStudentTeacher;
  /// Multiply the KD term (and its gradient) by tau^2.
  bool scale_by_tau_squared = false;

  void validate() const;
};

double kd_loss(std::span<const double> student, std::span<const double> teacher,
               const KdLossConfig& cfg);
double kd_loss(const LogitsVector& student, const LogitsVector& teacher,
               const KdLossConfig& cfg);

/// d kd_loss / d student.
std::vector<double> kd_loss_gradient(std::span<const double> student,
                                     std::span<const double> teacher,
                                     const KdLossConfig& cfg);

double total_loss(double ce, double kd, double lambda);

struct SoftLabelRecord {
  std::string input_id;
  LogitsVector z_hat{std::vector<double>{0.0, 0.0}};
  double tau = 1.0;
  std::vector<double> probabilities;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  /// The decision counts the estimate came from, when known.
  std::optional<std::vector<std::size_t>> counts;
};

SoftLabelRecord make_soft_label_record(std::string input_id,
                                       const SolveResult& result, double tau);
void to_json(nlohmann::json& j, const SoftLabelRecord& r);
void from_json(const nlohmann::json& j, SoftLabelRecord& r);

// ---------------------------------------------------------------------------
// Toy distillation harness

/// Thrown when a training loss stops being finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

enum class DistillMethod { kHard, kSmooth, kNoisy, kDbkd, kStandard };
std::string_view to_string(DistillMethod m);
std::optional<DistillMethod> parse_distill_method(std::string_view name);
inline constexpr DistillMethod kAllDistillMethods[] = {
    DistillMethod::kHard, DistillMethod::kSmooth, DistillMethod::kNoisy,
    DistillMethod::kDbkd, DistillMethod::kStandard};

/// Four unit-variance Gaussian blobs in 2-D along a zig-zag line. The teacher
/// is the Bayes-optimal linear classifier for the blobs.
struct ToyScenario {
  std::size_t classes = 4;
  std::size_t dims = 2;
  std::size_t train_size = 2000;
  std::size_t test_size = 500;
  /// Multiplies the blob means.
  double separation = 1.0;
  /// Logit noise of the simulated teacher's augmented queries.
  double teacher_sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ToyTrainingConfig {
  double learning_rate = 0.2;
  std::size_t epochs = 600;
  /// Student logits are A * (U * x) + c with U of this many rows.
  std::size_t student_rank = 1;
  KdLossConfig kd{1.0, 3.0};
  /// Augmented teacher queries per training point.
  std::size_t n_augment = 10;
  SolverConfig solver{};
  /// Label smoothing factor of the smooth baseline.
  double smoothing = 0.1;
  /// Standard deviation of the random logits behind the noisy baseline.
  double noisy_scale = 1.0;
  /// Temperature at which soft labels are compared with the teacher.
  double mse_tau = 2.0;

  void validate() const;
};

struct ToyReport {
  DistillMethod method = DistillMethod::kDbkd;
  /// Student accuracy on the held-out points.
  double accuracy = 0.0;
  /// Mean squared difference between the method's soft labels and the
  /// teacher's softmax at mse_tau, over training points and labels.
  double mse = 0.0;
  double teacher_accuracy = 0.0;
  /// Training points whose N teacher decisions were all the same.
  double one_hot_fraction = 0.0;
  double final_loss = 0.0;
};

ToyReport toy_distillation_run(const ToyScenario& scenario, DistillMethod method,
                               const ToyTrainingConfig& training = {});

/// Lookup tables used by the harness, built on first use per (L, N, solver
/// config) and kept for the life of the process.
const LogitsLookupTable& cached_lookup_table(std::size_t labels, std::size_t n,
                                             const SolverConfig& cfg);

enum class SweepParameter { kN, kEpsilon, kSigma };
std::optional<SweepParameter> parse_sweep_parameter(std::string_view name);
std::string_view to_string(SweepParameter p);

struct SweepRow {
  double value = 0.0;
  double accuracy = 0.0;
  double mse = 0.0;
};

/// Runs the dbkd method per grid value, averaging over `repeats` scenario
/// seeds (scenario.seed, scenario.seed + 1, ...).
std::vector<SweepRow> run_sweep(SweepParameter parameter,
                                std::span<const double> grid,
                                const ToyScenario& scenario,
                                const ToyTrainingConfig& training,
                                std::size_t repeats = 1);

}  // namespace dbkd
