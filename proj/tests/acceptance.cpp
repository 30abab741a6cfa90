// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dbkd/augment.hpp"
#include "dbkd/compositions.hpp"
#include "dbkd/decision_model.hpp"
#include "dbkd/distill.hpp"
#include "dbkd/orthant.hpp"
#include "dbkd/solver.hpp"
#include "dbkd/teacher.hpp"
#include "oracles.hpp"

using namespace dbkd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

std::size_t pick(std::mt19937_64& g, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

// Plain Cholesky and sampler for the Monte Carlo reference.
std::vector<std::vector<double>> oracle_cholesky(const SquareMatrix& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
    }
  }
  return l;
}

oracle::Frequency oracle_orthant_mc(const std::vector<double>& mu, const SquareMatrix& cov,
                                    std::size_t samples, std::uint64_t seed) {
  const auto l = oracle_cholesky(cov);
  const std::size_t k = mu.size();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<double> m(k);
  std::size_t inside = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : m) v = normal(gen);
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      double u = mu[i];
      for (std::size_t j = 0; j <= i; ++j) u += l[i][j] * m[j];
      ok = u >= 0.0;
    }
    inside += ok ? 1 : 0;
  }
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(inside) / n;
  const double pc = std::clamp(p, 0.5 / n, 1.0 - 0.5 / n);
  return {{p}, {std::sqrt(pc * (1.0 - pc) / n)}};
}

Outcome criterion1() {
  std::mt19937_64 g(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const double sigma = uniform(g, 0.5, 2.0);
    std::vector<double> mu(k);
    for (double& m : mu) m = uniform(g, -3.0, 3.0);
    const SquareMatrix cov = difference_covariance(k, NoiseScale(sigma));
    const double p = orthant_probability(OrthantProblem(mu, cov));
    const auto mc = oracle_orthant_mc(mu, cov, 1'000'000, 1000 + trial);
    const double z = std::abs(p - mc.p[0]) / mc.se[0];
    worst = std::max(worst, z);
    bad += z > 3.0 ? 1 : 0;
  }
  const double elapsed = seconds_since(t0);
  return {bad == 0 && elapsed < 60.0,
          fmt("50 problems, worst deviation %.2f SE, %zu beyond 3 SE, %.1f s", worst, bad,
              elapsed)};
}

Outcome criterion2() {
  double worst = 0.0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      const double delta = -4.0 + 8.0 * a / 9.0;
      const double sigma = 0.25 + 2.75 * b / 9.0;
      const auto q = theoretical_distribution(LogitsVector({delta, 0.0}),
                                              {NoiseScale(sigma), {}});
      const double expect = oracle::cdf_erfc(delta / (sigma * std::sqrt(2.0)));
      worst = std::max({worst, std::abs(q[0] - expect), std::abs(q[1] - (1.0 - expect))});
    }
  }
  return {worst <= 1e-6, fmt("100-point grid, max error %.2e", worst)};
}

Outcome criterion3() {
  double worst = 0.0;
  for (std::size_t l = 2; l <= 6; ++l) {
    for (double c : {0.0, 1.7, -42.0}) {
      const auto q = theoretical_distribution(LogitsVector(std::vector<double>(l, c)));
      for (double v : q.probs()) worst = std::max(worst, std::abs(v - 1.0 / l));
    }
  }
  return {worst <= 1e-6, fmt("L = 2..6, max deviation from uniform %.2e", worst)};
}

Outcome criterion4() {
  std::mt19937_64 g(404);
  const double sigma = 1.0;
  SolverConfig cfg;
  cfg.epsilon = 1e-4;
  std::size_t ok = 0, unconverged = 0, adjacent = 0;
  std::string flagged;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t l = 2 + trial % 4;
    std::vector<double> z(l);
    do {
      double sum = 0.0;
      for (std::size_t j = 0; j + 1 < l; ++j) sum += (z[j] = uniform(g, -3 * sigma, 3 * sigma));
      z[l - 1] = -sum;
    } while (std::abs(z[l - 1]) > 3 * sigma);

    const auto q = theoretical_distribution(LogitsVector(z));
    const auto r = solve_logits(q, cfg);
    const auto zh = r.z_hat.to_vector();
    const double mean = std::accumulate(zh.begin(), zh.end(), 0.0) / static_cast<double>(l);
    double err = 0.0;
    for (std::size_t j = 0; j < l; ++j) err = std::max(err, std::abs(zh[j] - mean - z[j]));
    if (r.converged && r.iterations <= 100 && err <= 0.05) ++ok;
    if (!r.converged) {
      ++unconverged;
      const double qmin = *std::min_element(q.probs().begin(), q.probs().end());
      const bool near_one_hot = qmin < 0.01;
      adjacent += near_one_hot ? 1 : 0;
      std::printf("  criterion 4 flagged: L=%zu min Q=%.2e residual=%.2e error=%.3f%s\n", l,
                  qmin, r.residual_linf, err, near_one_hot ? " (one-hot-adjacent)" : "");
    }
  }
  const double rate = ok / 100.0;
  return {rate >= 0.95 && adjacent == unconverged,
          fmt("%zu/100 recovered within 0.05, %zu unconverged (%zu one-hot-adjacent)", ok,
              unconverged, adjacent)};
}

Outcome criterion5() {
  SolverConfig cfg;
  const auto table = build_lookup_table(LabelSpace(4), 10, cfg);
  std::size_t equal = 0;
  for (const auto& [counts, result] : table.entries()) {
    const auto direct = solve_logits(DecisionDistribution::from_counts(counts), cfg);
    equal += direct == result ? 1 : 0;
  }
  const auto expected = oracle::pascal(13, 3);
  return {table.size() == expected && equal == expected,
          fmt("%zu entries (C(13,3) = %llu), %zu bit-identical to direct solves", table.size(),
              static_cast<unsigned long long>(expected), equal)};
}

Outcome criterion6() {
  std::mt19937_64 g(606);
  const std::size_t n = 100'000;
  double worst = 0.0;
  AugmentConfig aug;
  const TokenSequence x = TokenSequence::tokenize("a short probe sentence", *aug.stopwords);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t l = 2 + trial % 4;
    std::vector<double> z(l);
    for (double& v : z) v = uniform(g, -2.0, 2.0);
    GaussianSimTeacher teacher(LogitsVector(z), NoiseScale(1.0), 7000 + trial);
    EstimateOptions opt;
    opt.input_id = "probe-" + std::to_string(trial);
    const auto p = estimate_empirical(x, teacher, n, aug, opt);
    const auto q = oracle::decision_probabilities_1d(z, 1.0);
    for (std::size_t i = 0; i < l; ++i) {
      const double se = std::sqrt(q[i] * (1.0 - q[i]) / static_cast<double>(n));
      worst = std::max(worst, std::abs(p[i] - q[i]) / se);
    }
  }
  return {worst <= 3.0, fmt("10 teachers, N = 1e5, worst deviation %.2f binomial SE", worst)};
}

Outcome criterion7() {
  const DistillMethod order[] = {DistillMethod::kDbkd, DistillMethod::kSmooth,
                                 DistillMethod::kNoisy, DistillMethod::kHard};
  std::vector<double> mse;
  for (DistillMethod m : order) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ToyScenario s;
      s.seed = seed;
      sum += toy_distillation_run(s, m).mse;
    }
    mse.push_back(sum / 3.0);
  }
  const bool ok = mse[0] < mse[1] && mse[1] < mse[2] && mse[2] < mse[3];
  return {ok, fmt("MSE dbkd %.4f, smooth %.4f, noisy %.4f, hard %.4f", mse[0], mse[1], mse[2],
                  mse[3])};
}

Outcome criterion8() {
  ToyScenario s;
  s.train_size = 200;
  s.test_size = 2000;
  const std::size_t repeats = 10;
  const ToyTrainingConfig t;
  const std::vector<double> n_grid = {1, 2, 5, 10, 20, 40};
  const auto rows = run_sweep(SweepParameter::kN, n_grid, s, t, repeats);
  std::string detail = "N:";
  for (const auto& r : rows) detail += fmt(" %g=%.4f", r.value, r.accuracy);

  bool monotone = true;
  for (std::size_t i = 1; i < 4; ++i) monotone &= rows[i].accuracy >= rows[i - 1].accuracy;
  // Two independent accuracy means over test_size * repeats points.
  const double a10 = rows[3].accuracy;
  const double noise =
      3.0 * std::sqrt(2.0 * a10 * (1.0 - a10) / static_cast<double>(s.test_size * repeats));
  bool flat = true;
  for (std::size_t i = 4; i < rows.size(); ++i) flat &= std::abs(rows[i].accuracy - a10) <= noise;

  const std::vector<double> eps_grid = {1e-3, 1.0};
  const auto eps = run_sweep(SweepParameter::kEpsilon, eps_grid, s, t, repeats);
  const bool eps_ok = eps[1].accuracy < eps[0].accuracy;
  detail += fmt("; eps 1e-3=%.4f 1=%.4f; flat band %.4f", eps[0].accuracy, eps[1].accuracy, noise);
  return {monotone && flat && eps_ok, detail};
}

Outcome criterion9() {
  std::mt19937_64 g(909);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t l = 2 + trial % 5;
    std::vector<double> v(l), zh(l);
    for (double& x : v) x = 2.0 * normal(g);
    for (double& x : zh) x = 2.0 * normal(g);
    KdLossConfig cfg;
    cfg.tau = uniform(g, 0.5, 4.0);
    const auto loss = [&](const std::vector<double>& s) {
      return oracle::kl(oracle::softmax(s, cfg.tau), oracle::softmax(zh, cfg.tau));
    };
    const auto grad = kd_loss_gradient(v, zh, cfg);
    const double h = 1e-5;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
      auto up = v, dn = v;
      up[k] += h;
      dn[k] -= h;
      const double fd = (loss(up) - loss(dn)) / (2 * h);
      num = std::max(num, std::abs(grad[k] - fd));
      den = std::max({den, std::abs(grad[k]), std::abs(fd)});
    }
    worst = std::max(worst, num / std::max(den, 1e-12));
  }
  return {worst <= 1e-4, fmt("20 triples, worst relative error %.2e", worst)};
}

std::vector<double> permute(const std::vector<double>& v, const std::vector<std::size_t>& p) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[p[i]];
  return out;
}

Outcome criterion10() {
  constexpr int kTrials = 1000;
  std::mt19937_64 g(1010);
  std::vector<std::string> failed;

  // Translation invariance.
  {
    double worst = 0.0;
    for (int t = 0; t < kTrials; ++t) {
      const std::size_t l = pick(g, 2, 5);
      std::vector<double> z(l), zc(l);
      const double c = uniform(g, -10.0, 10.0);
      for (std::size_t j = 0; j < l; ++j) {
        z[j] = uniform(g, -3.0, 3.0);
        zc[j] = z[j] + c;
      }
      const auto a = theoretical_distribution(LogitsVector(z));
      const auto b = theoretical_distribution(LogitsVector(zc));
      for (std::size_t j = 0; j < l; ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    }
    if (worst > 1e-8) failed.push_back(fmt("translation %.1e", worst));
  }
  // Permutation equivariance of the distribution and of argmax_decision.
  {
    double worst = 0.0;
    std::size_t argmax_bad = 0;
    for (int t = 0; t < kTrials; ++t) {
      const std::size_t l = pick(g, 2, 5);
      std::vector<double> z(l);
      for (double& v : z) v = uniform(g, -3.0, 3.0);
      std::vector<std::size_t> p(l);
      std::iota(p.begin(), p.end(), 0);
      std::shuffle(p.begin(), p.end(), g);
      const auto zp = permute(z, p);
      const auto a = permute(theoretical_distribution(LogitsVector(z)).to_vector(), p);
      const auto b = theoretical_distribution(LogitsVector(zp)).to_vector();
      for (std::size_t j = 0; j < l; ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
      argmax_bad += p[argmax_decision(zp)] == argmax_decision(z) ? 0 : 1;
    }
    if (worst > 1e-8 || argmax_bad > 0) {
      failed.push_back(fmt("permutation %.1e, argmax %zu", worst, argmax_bad));
    }
  }
  // Argmax preservation on converged solves with a unique maximum.
  {
    std::size_t done = 0, bad = 0;
    while (done < kTrials) {
      const std::size_t l = pick(g, 2, 4);
      const std::size_t n = pick(g, 3, 20);
      std::vector<std::size_t> counts(l, 0);
      for (std::size_t s = 0; s < n; ++s) ++counts[pick(g, 0, l - 1)];
      const auto top = std::max_element(counts.begin(), counts.end());
      if (std::count(counts.begin(), counts.end(), *top) != 1) continue;
      const auto r = solve_logits(DecisionDistribution::from_counts(counts), SolverConfig{});
      if (!r.converged) continue;
      ++done;
      bad += argmax_decision(r.z_hat) == static_cast<Label>(top - counts.begin()) ? 0 : 1;
    }
    if (bad > 0) failed.push_back(fmt("argmax preservation %zu", bad));
  }
  // Zero sum after an arbitrary number of undamped iterations.
  {
    double worst = 0.0;
    for (int t = 0; t < kTrials; ++t) {
      const std::size_t l = pick(g, 2, 5);
      std::vector<std::size_t> counts(l, 0);
      const std::size_t n = pick(g, 1, 30);
      for (std::size_t s = 0; s < n; ++s) ++counts[pick(g, 0, l - 1)];
      SolverConfig cfg;
      cfg.max_iterations = pick(g, 1, 12);
      const auto zh = solve_logits(DecisionDistribution::from_counts(counts), cfg).z_hat;
      const auto v = zh.to_vector();
      worst = std::max(worst, std::abs(std::accumulate(v.begin(), v.end(), 0.0)));
    }
    if (worst > 1e-9) failed.push_back(fmt("zero-sum %.1e", worst));
  }
  // Augmentation never empties a non-empty input.
  {
    const std::vector<std::string> vocab = {"the", "a", "good", "movie", "is", "not",
                                            "fast", "dog", "of", "film", "bad", "and"};
    auto lex = std::make_shared<SynonymLexicon>();
    lex->add("good", {"fine", "nice"});
    lex->add("movie", {"film", "picture"});
    lex->add("fast", {"quick"});
    std::size_t empty = 0;
    for (int t = 0; t < kTrials; ++t) {
      AugmentConfig cfg;
      cfg.lexicon = lex;
      cfg.seed = g();
      cfg.alpha_expectation = uniform(g, 0.01, 0.5);
      std::string text;
      for (std::size_t i = 0, len = pick(g, 1, 8); i < len; ++i) {
        text += vocab[pick(g, 0, vocab.size() - 1)] + " ";
      }
      const TokenSequence x = TokenSequence::tokenize(text, *cfg.stopwords);
      empty += augment(x, pick(g, 1, 1000), cfg).empty() ? 1 : 0;
    }
    if (empty > 0) failed.push_back(fmt("augmentation emptied %zu inputs", empty));
  }
  // Cache soundness: a repeated estimate is answered from the log.
  {
    std::size_t bad = 0;
    DecisionLog log;
    AugmentConfig aug;
    for (int t = 0; t < kTrials; ++t) {
      const std::size_t l = pick(g, 2, 5);
      std::vector<double> z(l);
      for (double& v : z) v = uniform(g, -2.0, 2.0);
      GaussianSimTeacher teacher(LogitsVector(z), NoiseScale(1.0), g());
      const TokenSequence x =
          TokenSequence::tokenize("input number " + std::to_string(t), *aug.stopwords);
      const std::size_t n = pick(g, 1, 10);
      EstimateOptions opt;
      opt.log = &log;
      const auto first = estimate_empirical(x, teacher, n, aug, opt);
      const std::size_t queries = teacher.query_count();
      const auto second = estimate_empirical(x, teacher, n, aug, opt);
      bad += (teacher.query_count() == queries && first.counts() == second.counts()) ? 0 : 1;
    }
    if (bad > 0) failed.push_back(fmt("cache soundness %zu", bad));
  }

  std::string detail = "6 properties x 1000 trials";
  for (const auto& f : failed) detail += "; failed " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
