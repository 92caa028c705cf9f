#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rlctfa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Noise variances psi (all > 0) and a p x k loading matrix.
class FactorParams {
 public:
  FactorParams(Vector psi, Matrix lambda);

  const Vector& psi() const { return psi_; }
  const Matrix& lambda() const { return lambda_; }
  int p() const { return static_cast<int>(psi_.size()); }
  int k() const { return static_cast<int>(lambda_.cols()); }

 private:
  Vector psi_;
  Matrix lambda_;
};

/// diag(psi) + Lambda Lambda^T
Matrix parametrize(const FactorParams& params);

/// A symmetric positive definite covariance in the factor model. When the
/// point was built from parameters it carries them, along with the minimum
/// loading rank r that generated it.
class FactorModelPoint {
 public:
  explicit FactorModelPoint(Matrix sigma0, std::optional<FactorParams> provenance = std::nullopt,
                            std::optional<int> min_rank = std::nullopt);

  /// Point with provenance; min_rank defaults to rank(Lambda).
  static FactorModelPoint from_params(const FactorParams& params, std::optional<int> min_rank = std::nullopt);

  const Matrix& sigma0() const { return sigma0_; }
  const std::optional<FactorParams>& provenance() const { return provenance_; }
  const std::optional<int>& min_rank() const { return min_rank_; }
  int p() const { return static_cast<int>(sigma0_.rows()); }

 private:
  Matrix sigma0_;
  std::optional<FactorParams> provenance_;
  std::optional<int> min_rank_;
};

/// S_n = (1/n) sum X_i X_i^T with the sample size it came from.
struct SampleCovariance {
  Matrix s;
  long n = 0;

  /// Validates symmetry (1e-12 relative) and numerical PSD (eigenvalues >= -1e-10).
  static SampleCovariance checked(Matrix s, long n);
};

struct ModelDimension {
  long d;          // (k+1)p - k(k-1)/2
  long effective;  // min(d, p(p+1)/2)
};

ModelDimension model_dimension(int p, int k);

class NotPositiveDefinite : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Per-observation Gaussian negative log-likelihood
/// (p/2) log 2pi + 1/2 log det Sigma + 1/2 tr(Sigma^{-1} S).
double neg_log_lik(const Matrix& sigma, const SampleCovariance& s);

/// neg_log_lik at its minimizer Sigma = S.
double min_neg_log_lik(const SampleCovariance& s);

/// Draws n observations from N(0, Sigma0) and returns their second-moment
/// matrix. Deterministic in `seed`. With n <= p the result is singular.
SampleCovariance sample_data(const FactorModelPoint& point, long n, std::uint64_t seed);

/// Sample covariances of the first n observations of one simulated stream,
/// for each n in `sizes` (ascending). Entry i equals sample_data(point,
/// sizes[i], seed).
std::vector<SampleCovariance> sample_data_nested(const FactorModelPoint& point,
                                                 const std::vector<long>& sizes, std::uint64_t seed);

/// Sum over i < j of (lambda_i . lambda_j - sigma_ij)^2: the squared
/// generators of the reduced fiber ideal evaluated at `lambda`.
double fiber_sos(const FactorModelPoint& point, const Matrix& lambda);

enum class OneFactorStratum { GenericA, TwoNonzeroB, DiagonalC };

const char* to_string(OneFactorStratum s);

/// Stratum of a one-factor point from the non-zero pattern of its loadings.
OneFactorStratum classify_one_factor(const FactorModelPoint& point, double tol = 1e-9);

/// Gamma Sigma0 Gamma with Gamma = diag(gamma); provenance is rescaled and
/// the minimum rank carried over.
FactorModelPoint torus_rescale(const FactorModelPoint& point, const Vector& gamma);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

}  // namespace rlctfa
