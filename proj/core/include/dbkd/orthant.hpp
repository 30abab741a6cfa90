#pragma once

// Non-centred Gaussian orthant probabilities P(U >= 0) for U ~ N(mu, R).
//
// R is factored as B * B^T (Cholesky) so that U = B * M + mu with
// M ~ N(0, I). The constraints then unroll level by level,
//
//   M_j >= -(mu_j + sum_{k<j} b_jk M_k) / b_jj,
//
// and the probability is a nest of one-dimensional integrals of the standard
// normal density. The innermost level is the closed-form normal tail; outer
// levels use Gauss-Legendre quadrature on [max(limit, -cut), cut].
//
// When every column of B is constant below the diagonal (true for any
// exchangeable covariance, in particular the decision-model one) the inner
// integrals depend on the outer variables only through one running sum. In
// that case the levels are tabulated over that sum and interpolated, which
// costs O(K * grid * nodes) instead of nodes^(K-1).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dbkd/core.hpp"

namespace dbkd {

/// Dense row-major square matrix. Small by construction (K = L - 1).
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0)
      : n_(n), data_(n * n, fill) {}
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Thrown when a covariance is not positive definite.
class DecompositionError : public Error {
 public:
  DecompositionError(std::size_t pivot, double value);
  /// 0-based index of the first non-positive pivot.
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Lower-triangular B with strictly positive diagonal and B * B^T = cov.
class CholeskyFactor {
 public:
  const SquareMatrix& lower() const noexcept { return b_; }
  std::size_t size() const noexcept { return b_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return b_(i, j); }

  /// True when b_mk == b_(k+1)k for all m > k (within a relative 1e-12).
  bool has_constant_columns() const noexcept { return constant_columns_; }

  SquareMatrix reconstruct() const;

 private:
  friend CholeskyFactor cholesky(const SquareMatrix& cov);
  explicit CholeskyFactor(SquareMatrix b);

  SquareMatrix b_;
  bool constant_columns_ = false;
};

/// Cholesky decomposition. Throws ContractError for a non-symmetric input and
/// DecompositionError carrying the failing pivot for a non-PD one.
CholeskyFactor cholesky(const SquareMatrix& cov);

enum class OrthantStrategy {
  kAutomatic,  // tabulate when possible and cheaper, else nest directly
  kDirect,
  kTabulated,
};

struct QuadratureConfig {
  /// Gauss-Legendre nodes per nested integral.
  std::size_t nodes_per_level = 64;
  /// Integration truncation, in standard deviations of each level variable.
  double upper_cut = 8.0;
  double tolerance = 1e-6;
  OrthantStrategy strategy = OrthantStrategy::kAutomatic;

  void validate() const;
};

/// mu and a symmetric positive definite covariance, dimension K >= 1.
class OrthantProblem {
 public:
  OrthantProblem(std::vector<double> mu, SquareMatrix cov);

  std::span<const double> mu() const noexcept { return mu_; }
  const SquareMatrix& cov() const noexcept { return cov_; }
  const CholeskyFactor& factor() const noexcept { return factor_; }
  std::size_t dimension() const noexcept { return mu_.size(); }

 private:
  std::vector<double> mu_;
  SquareMatrix cov_;
  CholeskyFactor factor_;
};

double orthant_probability(const OrthantProblem& problem,
                           const QuadratureConfig& config = {});

/// Same computation against a precomputed factor; lets callers that share one
/// covariance across many mean vectors skip the decomposition.
double orthant_probability(std::span<const double> mu,
                           const CholeskyFactor& factor,
                           const QuadratureConfig& config = {});

struct MonteCarloEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
};

/// Fraction of `samples` draws of N(mu, R) landing in the orthant, with its
/// binomial standard error. For the error the frequency is clamped to
/// [0.5/n, 1 - 0.5/n] so it stays positive when no draw (or every draw)
/// lands inside.
MonteCarloEstimate monte_carlo_orthant(const OrthantProblem& problem,
                                       std::size_t samples, std::uint64_t seed);

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once and cached.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Standard normal density and distribution function.
double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

}  // namespace dbkd
