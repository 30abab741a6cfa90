#include "dbkd/distill.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace dbkd {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ContractError("temperature must be positive and finite");
  }
}

}  // namespace

std::vector<double> log_soft_label(std::span<const double> z, double tau) {
  check_tau(tau);
  if (z.empty()) throw ContractError("soft label of an empty vector");
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = (z[i] - top) / tau;
    sum += std::exp(out[i]);
  }
  const double log_sum = std::log(sum);
  for (double& x : out) x -= log_sum;
  return out;
}

std::vector<double> soft_label(std::span<const double> z, double tau) {
  check_tau(tau);
  if (z.empty()) throw ContractError("soft label of an empty vector");
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp((z[i] - top) / tau);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

std::vector<double> soft_label(const LogitsVector& z, double tau) {
  return soft_label(z.values(), tau);
}

void KdLossConfig::validate() const {
  check_tau(tau);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractError("lambda must be non-negative");
  }
}

double kd_loss(std::span<const double> student, std::span<const double> teacher,
               const KdLossConfig& cfg) {
  cfg.validate();
  if (student.size() != teacher.size()) {
    throw ContractError("student and teacher logits differ in length");
  }
  const auto ls = log_soft_label(student, cfg.tau);
  const auto lt = log_soft_label(teacher, cfg.tau);
  const auto& lp = cfg.direction == KlDirection::kStudentTeacher ? ls : lt;
  const auto& lq = cfg.direction == KlDirection::kStudentTeacher ? lt : ls;
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
  kl = std::max(kl, 0.0);
  return cfg.scale_by_tau_squared ? kl * cfg.tau * cfg.tau : kl;
}

double kd_loss(const LogitsVector& student, const LogitsVector& teacher,
               const KdLossConfig& cfg) {
  return kd_loss(student.values(), teacher.values(), cfg);
}

std::vector<double> kd_loss_gradient(std::span<const double> student,
                                     std::span<const double> teacher,
                                     const KdLossConfig& cfg) {
  cfg.validate();
  if (student.size() != teacher.size()) {
    throw ContractError("student and teacher logits differ in length");
  }
  const auto ls = log_soft_label(student, cfg.tau);
  const auto lt = log_soft_label(teacher, cfg.tau);
  const std::size_t l = ls.size();
  std::vector<double> g(l);
  if (cfg.direction == KlDirection::kStudentTeacher) {
    // d/dv_k sum_i s_i (log s_i - log t_i) = s_k (log s_k - log t_k - KL) / tau
    double kl = 0.0;
    for (std::size_t i = 0; i < l; ++i) kl += std::exp(ls[i]) * (ls[i] - lt[i]);
    for (std::size_t k = 0; k < l; ++k) {
      g[k] = std::exp(ls[k]) * (ls[k] - lt[k] - kl) / cfg.tau;
    }
  } else {
    for (std::size_t k = 0; k < l; ++k) {
      g[k] = (std::exp(ls[k]) - std::exp(lt[k])) / cfg.tau;
    }
  }
  if (cfg.scale_by_tau_squared) {
    for (double& x : g) x *= cfg.tau * cfg.tau;
  }
  return g;
}

double total_loss(double ce, double kd, double lambda) { return ce + lambda * kd; }

SoftLabelRecord make_soft_label_record(std::string input_id,
                                       const SolveResult& result, double tau) {
  SoftLabelRecord r;
  r.input_id = std::move(input_id);
  r.z_hat = result.z_hat;
  r.tau = tau;
  r.probabilities = soft_label(result.z_hat, tau);
  r.converged = result.converged;
  r.iterations = result.iterations;
  r.residual = result.residual_linf;
  return r;
}

void to_json(nlohmann::json& j, const SoftLabelRecord& r) {
  j = {{"id", r.input_id},
       {"z_hat", r.z_hat.to_vector()},
       {"tau", r.tau},
       {"probabilities", r.probabilities},
       {"converged", r.converged},
       {"iterations", r.iterations},
       {"residual", r.residual}};
  if (r.counts) j["counts"] = *r.counts;
}

void from_json(const nlohmann::json& j, SoftLabelRecord& r) {
  r.input_id = j.at("id").get<std::string>();
  r.z_hat = LogitsVector(j.at("z_hat").get<std::vector<double>>());
  r.tau = j.at("tau").get<double>();
  r.probabilities = j.at("probabilities").get<std::vector<double>>();
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.residual = j.at("residual").get<double>();
  if (j.contains("counts")) {
    r.counts = j.at("counts").get<std::vector<std::size_t>>();
  } else {
    r.counts.reset();
  }
}

}  // namespace dbkd
