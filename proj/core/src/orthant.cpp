#include "dbkd/orthant.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "dbkd/random.hpp"

namespace dbkd {

// ---------------------------------------------------------------------------
// Small helpers

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi *
                                   std::numbers::sqrt2);
}

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

const GaussLegendreRule& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, GaussLegendreRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

// ---------------------------------------------------------------------------
// Matrices and the Cholesky factor

SquareMatrix::SquareMatrix(
    std::initializer_list<std::initializer_list<double>> rows)
    : n_(rows.size()) {
  data_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) throw ContractError("square matrix rows must have n entries");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DecompositionError::DecompositionError(std::size_t pivot, double value)
    : Error([&] {
        std::ostringstream msg;
        msg << "covariance is not positive definite: pivot " << pivot
            << " is " << value;
        return msg.str();
      }()),
      pivot_(pivot) {}

CholeskyFactor::CholeskyFactor(SquareMatrix b) : b_(std::move(b)) {
  const std::size_t n = b_.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, b_(i, i));
  constant_columns_ = true;
  for (std::size_t k = 0; k + 2 < n && constant_columns_; ++k) {
    const double ref = b_(k + 1, k);
    for (std::size_t m = k + 2; m < n; ++m) {
      if (std::abs(b_(m, k) - ref) > 1e-12 * scale) {
        constant_columns_ = false;
        break;
      }
    }
  }
}

SquareMatrix CholeskyFactor::reconstruct() const {
  const std::size_t n = b_.size();
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= std::min(i, j); ++k) s += b_(i, k) * b_(j, k);
      out(i, j) = s;
    }
  }
  return out;
}

CholeskyFactor cholesky(const SquareMatrix& cov) {
  const std::size_t n = cov.size();
  if (n == 0) throw ContractError("cholesky of an empty matrix");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(cov(i, j))) throw ContractError("covariance entries must be finite");
      scale = std::max(scale, std::abs(cov(i, j)));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-12 * std::max(scale, 1.0)) {
        throw ContractError("covariance is not symmetric");
      }
    }
  }

  SquareMatrix b(n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = cov(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= b(j, k) * b(j, k);
    if (!(diag > 0.0)) throw DecompositionError(j, diag);
    const double bjj = std::sqrt(diag);
    b(j, j) = bjj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = cov(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= b(i, k) * b(j, k);
      b(i, j) = s / bjj;
    }
  }
  return CholeskyFactor(std::move(b));
}

void QuadratureConfig::validate() const {
  if (nodes_per_level < 8) throw ContractError("nodes_per_level must be >= 8");
  if (!(upper_cut >= 6.0) || !std::isfinite(upper_cut)) {
    throw ContractError("upper_cut must be >= 6");
  }
  if (!(tolerance > 0.0)) throw ContractError("tolerance must be positive");
}

OrthantProblem::OrthantProblem(std::vector<double> mu, SquareMatrix cov)
    : mu_(std::move(mu)), cov_(std::move(cov)), factor_([this] {
        if (mu_.empty()) throw ContractError("orthant problem needs dimension >= 1");
        if (cov_.size() != mu_.size()) {
          throw ContractError("covariance dimension does not match mu");
        }
        for (double m : mu_) {
          if (!std::isfinite(m)) throw ContractError("mu entries must be finite");
        }
        return cholesky(cov_);
      }()) {}

// ---------------------------------------------------------------------------
// Integration

namespace {

/// One Gauss-Legendre pass of phi(t) * f(t) over [max(lower, -cut), cut].
template <typename F>
double integrate_level(double lower, double cut, const GaussLegendreRule& rule,
                       F&& inner) {
  const double lo = std::max(lower, -cut);
  if (lo >= cut) return 0.0;
  const double half = 0.5 * (cut - lo);
  const double mid = 0.5 * (cut + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = mid + half * rule.nodes[i];
    sum += rule.weights[i] * normal_pdf(t) * inner(t);
  }
  return half * sum;
}

class DirectIntegrator {
 public:
  DirectIntegrator(std::span<const double> mu, const CholeskyFactor& b,
                   const QuadratureConfig& q)
      : b_(b), cut_(q.upper_cut), rule_(gauss_legendre(q.nodes_per_level)),
        k_(mu.size()), shifts_(k_ * k_) {
    std::copy(mu.begin(), mu.end(), shifts_.begin());
  }

  double run() { return level(0); }

 private:
  // shifts_ row j holds mu_m + sum_{k<j} b_mk t_k for m >= j.
  double level(std::size_t j) {
    const double* s = &shifts_[j * k_];
    const double bjj = b_(j, j);
    if (j + 1 == k_) return normal_cdf(s[j] / bjj);
    double* next = &shifts_[(j + 1) * k_];
    return integrate_level(-s[j] / bjj, cut_, rule_, [&](double t) {
      for (std::size_t m = j + 1; m < k_; ++m) next[m] = s[m] + b_(m, j) * t;
      return level(j + 1);
    });
  }

  const CholeskyFactor& b_;
  double cut_;
  const GaussLegendreRule& rule_;
  std::size_t k_;
  std::vector<double> shifts_;
};

/// Uniform-grid table with 4-point Lagrange interpolation.
class GridFunction {
 public:
  GridFunction(double lo, double hi, std::size_t points)
      : lo_(lo), step_((hi - lo) / static_cast<double>(points - 1)),
        values_(points) {}

  double abscissa(std::size_t i) const { return lo_ + step_ * static_cast<double>(i); }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }

  double operator()(double x) const {
    const double pos = (x - lo_) / step_;
    const auto last = static_cast<std::ptrdiff_t>(values_.size()) - 1;
    auto i = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, last - 3);
    const double u = pos - static_cast<double>(i);  // in [0, 3] when interior
    const double* v = &values_[static_cast<std::size_t>(i)];
    const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    return l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3];
  }

 private:
  double lo_;
  double step_;
  std::vector<double> values_;
};

struct TabulationPlan {
  std::vector<double> radius;  // radius[j]: |S| bound for the argument of g_j
  std::vector<std::size_t> points;
  std::size_t cost = 0;
};

constexpr double kGridStepsPerScale = 24.0;

TabulationPlan plan_tabulation(const CholeskyFactor& b, const QuadratureConfig& q) {
  const std::size_t k = b.size();
  TabulationPlan plan;
  plan.radius.assign(k, 0.0);
  plan.points.assign(k, 0);
  double min_diag = b(0, 0);
  for (std::size_t j = 0; j < k; ++j) min_diag = std::min(min_diag, b(j, j));
  const double step = min_diag / kGridStepsPerScale;
  double reach = 0.0;
  plan.cost = q.nodes_per_level;
  for (std::size_t j = 1; j < k; ++j) {
    reach += q.upper_cut * std::abs(b(j, j - 1));
    // A zero column leaves S at 0; keep the grid wide enough to interpolate.
    plan.radius[j] = std::max(reach, 4.0 * step);
    if (j + 1 < k) {
      plan.points[j] = std::max<std::size_t>(
          8, static_cast<std::size_t>(std::ceil(2.0 * reach / step)) + 1);
      plan.cost += plan.points[j] * q.nodes_per_level;
    }
  }
  return plan;
}

std::size_t direct_cost(std::size_t k, std::size_t nodes) {
  std::size_t cost = 1;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    if (cost > (std::size_t{1} << 40) / nodes) return std::size_t{1} << 40;
    cost *= nodes;
  }
  return cost;
}

double tabulated(std::span<const double> mu, const CholeskyFactor& b,
                 const QuadratureConfig& q, const TabulationPlan& plan) {
  const std::size_t k = mu.size();
  const GaussLegendreRule& rule = gauss_legendre(q.nodes_per_level);
  const double cut = q.upper_cut;
  const auto tail = [&](double s) {
    return normal_cdf((mu[k - 1] + s) / b(k - 1, k - 1));
  };

  // g_j(S): probability that constraints j..K-1 hold given the running sum
  // S = sum_{i<j} c_i t_i, with c_i the shared below-diagonal value of column i.
  std::vector<GridFunction> tables;
  tables.reserve(k);
  for (std::size_t j = 0; j < k; ++j) tables.emplace_back(0.0, 1.0, 8);

  for (std::size_t j = k - 1; j-- > 1;) {
    GridFunction g(-plan.radius[j], plan.radius[j], plan.points[j]);
    const double c = b(j + 1, j);
    const double d = b(j, j);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double s = g.abscissa(p);
      g[p] = integrate_level(-(mu[j] + s) / d, cut, rule, [&](double t) {
        const double next = s + c * t;
        return j + 2 == k ? tail(next) : tables[j + 1](next);
      });
    }
    tables[j] = std::move(g);
  }

  const double c0 = b(1, 0);
  return integrate_level(-mu[0] / b(0, 0), cut, rule, [&](double t) {
    return k == 2 ? tail(c0 * t) : tables[1](c0 * t);
  });
}

}  // namespace

double orthant_probability(std::span<const double> mu,
                           const CholeskyFactor& factor,
                           const QuadratureConfig& config) {
  config.validate();
  const std::size_t k = mu.size();
  if (k == 0) throw ContractError("orthant problem needs dimension >= 1");
  if (factor.size() != k) throw ContractError("factor dimension does not match mu");

  bool use_table = false;
  TabulationPlan plan;
  const bool tabulable = k >= 3 && factor.has_constant_columns();
  switch (config.strategy) {
    case OrthantStrategy::kAutomatic:
      if (tabulable) {
        plan = plan_tabulation(factor, config);
        use_table = plan.cost < direct_cost(k, config.nodes_per_level);
      }
      break;
    case OrthantStrategy::kDirect:
      break;
    case OrthantStrategy::kTabulated:
      if (!tabulable) {
        throw ContractError(
            "tabulated orthant integration needs K >= 3 and a factor with "
            "constant columns");
      }
      plan = plan_tabulation(factor, config);
      use_table = true;
      break;
  }
  const double p = use_table ? tabulated(mu, factor, config, plan)
                             : DirectIntegrator(mu, factor, config).run();
  return std::clamp(p, 0.0, 1.0);
}

double orthant_probability(const OrthantProblem& problem,
                           const QuadratureConfig& config) {
  return orthant_probability(problem.mu(), problem.factor(), config);
}

MonteCarloEstimate monte_carlo_orthant(const OrthantProblem& problem,
                                       std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw ContractError("monte_carlo_orthant needs >= 1000 samples");
  const std::size_t k = problem.dimension();
  const CholeskyFactor& b = problem.factor();
  const auto mu = problem.mu();
  Rng rng(seed);
  std::vector<double> m(k);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& x : m) x = rng.normal();
    bool inside = true;
    for (std::size_t i = 0; i < k && inside; ++i) {
      double u = mu[i];
      for (std::size_t j = 0; j <= i; ++j) u += b(i, j) * m[j];
      inside = u >= 0.0;
    }
    hits += inside ? 1 : 0;
  }
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / n;
  const double p_se = std::clamp(p, 0.5 / n, 1.0 - 0.5 / n);
  return {p, std::sqrt(p_se * (1.0 - p_se) / n)};
}

}  // namespace dbkd
