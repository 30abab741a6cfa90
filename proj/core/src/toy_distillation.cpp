#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>

#include "dbkd/distill.hpp"
#include "dbkd/random.hpp"
#include "dbkd/teacher.hpp"

namespace dbkd {

std::string_view to_string(DistillMethod m) {
  switch (m) {
    case DistillMethod::kHard: return "hard";
    case DistillMethod::kSmooth: return "smooth";
    case DistillMethod::kNoisy: return "noisy";
    case DistillMethod::kDbkd: return "dbkd";
    case DistillMethod::kStandard: return "standard";
  }
  return "unknown";
}

std::optional<DistillMethod> parse_distill_method(std::string_view name) {
  for (DistillMethod m : kAllDistillMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kN: return "N";
    case SweepParameter::kEpsilon: return "epsilon";
    case SweepParameter::kSigma: return "sigma";
  }
  return "unknown";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) {
  if (name == "N" || name == "n") return SweepParameter::kN;
  if (name == "epsilon" || name == "eps") return SweepParameter::kEpsilon;
  if (name == "sigma") return SweepParameter::kSigma;
  return std::nullopt;
}

void ToyScenario::validate() const {
  LabelSpace labels(classes);
  (void)labels;
  if (dims == 0) throw ContractError("scenario needs at least one feature dimension");
  if (train_size == 0 || test_size == 0) throw ContractError("scenario needs data");
  if (!(separation > 0.0)) throw ContractError("separation must be positive");
  NoiseScale sigma(teacher_sigma);
  (void)sigma;
}

void ToyTrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
  if (epochs == 0) throw ContractError("epochs must be >= 1");
  if (student_rank == 0) throw ContractError("student rank must be >= 1");
  if (n_augment == 0) throw ContractError("n_augment must be >= 1");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ContractError("smoothing must lie in [0, 1)");
  if (!(noisy_scale > 0.0)) throw ContractError("noisy_scale must be positive");
  if (!(mse_tau > 0.0)) throw ContractError("mse_tau must be positive");
  kd.validate();
  solver.validate();
}

const LogitsLookupTable& cached_lookup_table(std::size_t labels, std::size_t n,
                                             const SolverConfig& cfg) {
  using Key = std::tuple<std::size_t, std::size_t, double, double, std::size_t,
                         double, bool, std::size_t, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<LogitsLookupTable>> cache;
  const Key key{labels, n, cfg.sigma.value(), cfg.epsilon, cfg.max_iterations,
                cfg.damping, cfg.smooth_counts, cfg.quadrature.nodes_per_level,
                cfg.quadrature.upper_cut, cfg.quadrature.tolerance};
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) {
    slot = std::make_unique<LogitsLookupTable>(
        build_lookup_table(LabelSpace(labels), n, cfg, 0));
  }
  return *slot;
}

namespace {

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<Label> y;
};

struct Blobs {
  std::vector<std::vector<double>> means;
  Dataset train;
  Dataset test;
};

Blobs make_blobs(const ToyScenario& s) {
  Blobs b;
  const std::size_t l = s.classes;
  for (std::size_t c = 0; c < l; ++c) {
    std::vector<double> m(s.dims, 0.0);
    m[0] = (2.0 * static_cast<double>(c) - static_cast<double>(l - 1)) * s.separation;
    if (s.dims > 1) m[1] = (c % 2 == 0 ? 0.6 : -0.6) * s.separation;
    b.means.push_back(std::move(m));
  }
  Rng rng(derive_seed(s.seed, 1));
  const auto draw = [&](std::size_t count, Dataset& out) {
    for (std::size_t i = 0; i < count; ++i) {
      const Label y = rng.uniform_index(l);
      std::vector<double> x = b.means[y];
      for (double& v : x) v += rng.normal();
      out.x.push_back(std::move(x));
      out.y.push_back(y);
    }
  };
  draw(s.train_size, b.train);
  draw(s.test_size, b.test);
  return b;
}

/// Bayes logits for unit-variance blobs: mu_c . x - |mu_c|^2 / 2.
std::vector<double> teacher_logits(const Blobs& b, std::span<const double> x) {
  std::vector<double> z(b.means.size());
  for (std::size_t c = 0; c < z.size(); ++c) {
    double dot = 0.0, sq = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      dot += b.means[c][d] * x[d];
      sq += b.means[c][d] * b.means[c][d];
    }
    z[c] = dot - 0.5 * sq;
  }
  return z;
}

class Student {
 public:
  Student(std::size_t labels, std::size_t dims, std::size_t rank, std::uint64_t seed)
      : l_(labels), d_(dims), r_(rank), a_(labels * rank), u_(rank * dims),
        c_(labels, 0.0) {
    Rng rng(seed);
    for (double& v : a_) v = 0.1 * rng.normal();
    for (double& v : u_) v = 0.1 * rng.normal();
  }

  std::vector<double> hidden(std::span<const double> x) const {
    std::vector<double> h(r_, 0.0);
    for (std::size_t k = 0; k < r_; ++k) {
      for (std::size_t d = 0; d < d_; ++d) h[k] += u_[k * d_ + d] * x[d];
    }
    return h;
  }

  std::vector<double> logits(std::span<const double> h) const {
    std::vector<double> v = c_;
    for (std::size_t j = 0; j < l_; ++j) {
      for (std::size_t k = 0; k < r_; ++k) v[j] += a_[j * r_ + k] * h[k];
    }
    return v;
  }

  struct Gradient {
    std::vector<double> a, u, c;
  };
  Gradient zero_gradient() const {
    return {std::vector<double>(a_.size()), std::vector<double>(u_.size()),
            std::vector<double>(c_.size())};
  }

  /// Accumulates the parameter gradient for dLoss/dlogits = g at input x.
  void backprop(std::span<const double> x, std::span<const double> h,
                std::span<const double> g, Gradient& out) const {
    for (std::size_t j = 0; j < l_; ++j) {
      out.c[j] += g[j];
      for (std::size_t k = 0; k < r_; ++k) out.a[j * r_ + k] += g[j] * h[k];
    }
    for (std::size_t k = 0; k < r_; ++k) {
      double back = 0.0;
      for (std::size_t j = 0; j < l_; ++j) back += a_[j * r_ + k] * g[j];
      for (std::size_t d = 0; d < d_; ++d) out.u[k * d_ + d] += back * x[d];
    }
  }

  void step(const Gradient& g, double lr) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= lr * g.a[i];
    for (std::size_t i = 0; i < u_.size(); ++i) u_[i] -= lr * g.u[i];
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= lr * g.c[i];
  }

 private:
  std::size_t l_, d_, r_;
  std::vector<double> a_, u_, c_;
};

double mean_squared(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

ToyReport toy_distillation_run(const ToyScenario& scenario, DistillMethod method,
                               const ToyTrainingConfig& training) {
  scenario.validate();
  training.validate();
  const std::size_t l = scenario.classes;
  const Blobs blobs = make_blobs(scenario);
  const std::size_t n_train = blobs.train.x.size();
  const double tau = training.kd.tau;

  ToyReport report;
  report.method = method;

  // Per training point: the teacher's decision on the clean input, the
  // method's target as teacher-side logits at temperature tau (tau * log t,
  // so softmax(. / tau) gives t back) and its probabilities at mse_tau.
  std::vector<Label> decision(n_train);
  std::vector<std::vector<double>> target_logits(n_train);
  const LogitsLookupTable* table =
      method == DistillMethod::kDbkd
          ? &cached_lookup_table(l, training.n_augment, training.solver)
          : nullptr;
  Rng noisy_rng(derive_seed(scenario.seed, 3));
  const NoiseScale teacher_sigma(scenario.teacher_sigma);
  std::size_t one_hot = 0;
  double mse = 0.0;

  for (std::size_t i = 0; i < n_train; ++i) {
    const std::vector<double> z = teacher_logits(blobs, blobs.train.x[i]);
    decision[i] = argmax_decision(z);
    const std::vector<double> reference = soft_label(z, training.mse_tau);
    std::vector<double> probs;  // target at mse_tau

    switch (method) {
      case DistillMethod::kHard: {
        probs.assign(l, 0.0);
        probs[decision[i]] = 1.0;
        break;
      }
      case DistillMethod::kSmooth: {
        probs.assign(l, training.smoothing / static_cast<double>(l));
        probs[decision[i]] += 1.0 - training.smoothing;
        std::vector<double> t(l);
        for (std::size_t j = 0; j < l; ++j) t[j] = tau * std::log(probs[j]);
        target_logits[i] = std::move(t);
        break;
      }
      case DistillMethod::kNoisy: {
        std::vector<double> g(l);
        for (double& v : g) v = training.noisy_scale * noisy_rng.normal();
        // Keep the teacher decision on top.
        std::swap(g[decision[i]], g[argmax_decision(g)]);
        probs = soft_label(g, training.mse_tau);
        target_logits[i] = std::move(g);
        break;
      }
      case DistillMethod::kDbkd: {
        GaussianSimTeacher teacher(LogitsVector(z), teacher_sigma,
                                   derive_seed(scenario.seed, 2));
        Counts counts(l, 0);
        for (std::size_t n = 1; n <= training.n_augment; ++n) {
          ++counts[teacher.query({}, derive_seed(i, n))];
        }
        if (std::count(counts.begin(), counts.end(), std::size_t{0}) ==
            static_cast<std::ptrdiff_t>(l - 1)) {
          ++one_hot;
        }
        const SolveResult* r = table->find(counts);
        if (r == nullptr) throw Error("lookup table is missing a composition");
        probs = soft_label(r->z_hat, training.mse_tau);
        target_logits[i] = r->z_hat.to_vector();
        break;
      }
      case DistillMethod::kStandard: {
        probs = reference;
        target_logits[i] = z;
        break;
      }
    }
    mse += mean_squared(probs, reference);
  }
  report.mse = mse / static_cast<double>(n_train * l);
  report.one_hot_fraction =
      method == DistillMethod::kDbkd
          ? static_cast<double>(one_hot) / static_cast<double>(n_train)
          : 0.0;

  Student student(l, scenario.dims, training.student_rank,
                  derive_seed(scenario.seed, 4));
  const double lambda = training.kd.lambda;
  const double inv_n = 1.0 / static_cast<double>(n_train);
  for (std::size_t epoch = 0; epoch < training.epochs; ++epoch) {
    auto grad = student.zero_gradient();
    double loss = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
      const auto& x = blobs.train.x[i];
      const auto h = student.hidden(x);
      const auto v = student.logits(h);
      const auto log_p = log_soft_label(v, 1.0);
      const Label y = blobs.train.y[i];
      double ce = -log_p[y];
      std::vector<double> g(l);
      for (std::size_t j = 0; j < l; ++j) g[j] = std::exp(log_p[j]);
      g[y] -= 1.0;

      double kd = 0.0;
      if (lambda > 0.0) {
        std::vector<double> gk;
        if (method == DistillMethod::kHard) {
          // One-hot target: the KD term degenerates to tempered cross-entropy.
          const auto log_s = log_soft_label(v, tau);
          kd = -log_s[decision[i]];
          gk.resize(l);
          for (std::size_t j = 0; j < l; ++j) gk[j] = std::exp(log_s[j]) / tau;
          gk[decision[i]] -= 1.0 / tau;
          if (training.kd.scale_by_tau_squared) {
            kd *= tau * tau;
            for (double& e : gk) e *= tau * tau;
          }
        } else {
          kd = kd_loss(v, target_logits[i], training.kd);
          gk = kd_loss_gradient(v, target_logits[i], training.kd);
        }
        for (std::size_t j = 0; j < l; ++j) g[j] += lambda * gk[j];
      }
      loss += total_loss(ce, kd, lambda);
      for (double& e : g) e *= inv_n;
      student.backprop(x, h, g, grad);
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) {
      throw DivergenceError("training loss became non-finite at epoch " +
                            std::to_string(epoch));
    }
    report.final_loss = loss;
    student.step(grad, training.learning_rate);
  }

  std::size_t correct = 0, teacher_correct = 0;
  for (std::size_t i = 0; i < blobs.test.x.size(); ++i) {
    const auto& x = blobs.test.x[i];
    correct += argmax_decision(student.logits(student.hidden(x))) == blobs.test.y[i];
    teacher_correct += argmax_decision(teacher_logits(blobs, x)) == blobs.test.y[i];
  }
  const double n_test = static_cast<double>(blobs.test.x.size());
  report.accuracy = static_cast<double>(correct) / n_test;
  report.teacher_accuracy = static_cast<double>(teacher_correct) / n_test;
  return report;
}

std::vector<SweepRow> run_sweep(SweepParameter parameter,
                                std::span<const double> grid,
                                const ToyScenario& scenario,
                                const ToyTrainingConfig& training,
                                std::size_t repeats) {
  if (grid.empty()) throw ContractError("sweep grid must not be empty");
  if (repeats == 0) throw ContractError("sweep needs at least one repeat");
  std::vector<SweepRow> rows;
  for (double value : grid) {
    ToyTrainingConfig t = training;
    switch (parameter) {
      case SweepParameter::kN:
        if (!(value >= 1.0) || value != std::floor(value)) {
          throw ContractError("N grid values must be positive integers");
        }
        t.n_augment = static_cast<std::size_t>(value);
        break;
      case SweepParameter::kEpsilon:
        t.solver.epsilon = value;
        break;
      case SweepParameter::kSigma:
        t.solver.sigma = NoiseScale(value);
        break;
    }
    SweepRow row{value, 0.0, 0.0};
    for (std::size_t r = 0; r < repeats; ++r) {
      ToyScenario s = scenario;
      s.seed = scenario.seed + r;
      const ToyReport rep = toy_distillation_run(s, DistillMethod::kDbkd, t);
      row.accuracy += rep.accuracy;
      row.mse += rep.mse;
    }
    row.accuracy /= static_cast<double>(repeats);
    row.mse /= static_cast<double>(repeats);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dbkd
