#include "rlctfa/factor_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rlctfa/rng.hpp"

namespace rlctfa {

FactorParams::FactorParams(Vector psi, Matrix lambda) : psi_(std::move(psi)), lambda_(std::move(lambda)) {
  if (psi_.size() == 0) throw std::invalid_argument("FactorParams: p must be positive");
  if (lambda_.rows() != psi_.size()) {
    throw std::invalid_argument("FactorParams: loading matrix must have p rows");
  }
  for (Eigen::Index i = 0; i < psi_.size(); ++i) {
    if (!(psi_[i] > 0.0) || !std::isfinite(psi_[i])) {
      throw std::invalid_argument("FactorParams: noise variances must be positive");
    }
  }
  if (!lambda_.allFinite()) throw std::invalid_argument("FactorParams: non-finite loading");
}

Matrix parametrize(const FactorParams& params) {
  Matrix sigma = params.lambda() * params.lambda().transpose();
  sigma.diagonal() += params.psi();
  return sigma;
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

FactorModelPoint::FactorModelPoint(Matrix sigma0, std::optional<FactorParams> provenance,
                                   std::optional<int> min_rank)
    : sigma0_(std::move(sigma0)), provenance_(std::move(provenance)), min_rank_(min_rank) {
  if (sigma0_.rows() == 0 || !is_symmetric(sigma0_)) {
    throw std::invalid_argument("FactorModelPoint: covariance must be square and symmetric");
  }
  if (Eigen::LLT<Matrix>(sigma0_).info() != Eigen::Success) {
    throw NotPositiveDefinite("FactorModelPoint: covariance is not positive definite");
  }
  if (provenance_) {
    if (provenance_->p() != p()) throw std::invalid_argument("FactorModelPoint: provenance has wrong p");
    const Matrix rebuilt = parametrize(*provenance_);
    const double scale = std::max(1.0, sigma0_.cwiseAbs().maxCoeff());
    if ((rebuilt - sigma0_).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("FactorModelPoint: covariance does not match its provenance");
    }
    if (min_rank_) {
      const Matrix& lam = provenance_->lambda();
      const int rank = lam.cols() == 0 ? 0 : static_cast<int>(Eigen::FullPivLU<Matrix>(lam).rank());
      if (*min_rank_ < 0 || *min_rank_ > rank) {
        throw std::invalid_argument("FactorModelPoint: min_rank exceeds rank of the loadings");
      }
    }
  }
}

FactorModelPoint FactorModelPoint::from_params(const FactorParams& params, std::optional<int> min_rank) {
  if (!min_rank) {
    min_rank = params.k() == 0 ? 0 : static_cast<int>(Eigen::FullPivLU<Matrix>(params.lambda()).rank());
  }
  return FactorModelPoint(parametrize(params), params, min_rank);
}

SampleCovariance SampleCovariance::checked(Matrix s, long n) {
  if (!is_symmetric(s)) throw std::invalid_argument("SampleCovariance: matrix is not symmetric");
  if (n < 1) throw std::invalid_argument("SampleCovariance: sample size must be >= 1");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("SampleCovariance: matrix is not positive semidefinite");
  }
  return {std::move(s), n};
}

ModelDimension model_dimension(int p, int k) {
  if (p < 1 || k < 0) throw std::invalid_argument("model_dimension: need p >= 1 and k >= 0");
  if (k > p) throw std::invalid_argument("model_dimension: k must not exceed p");
  const long d = static_cast<long>(k + 1) * p - static_cast<long>(k) * (k - 1) / 2;
  const long ambient = static_cast<long>(p) * (p + 1) / 2;
  return {d, std::min(d, ambient)};
}

double neg_log_lik(const Matrix& sigma, const SampleCovariance& s) {
  const Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("neg_log_lik: sigma is not positive definite");
  const auto p = static_cast<double>(sigma.rows());
  const Matrix l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  // tr(Sigma^{-1} S) = tr(L^{-1} S L^{-T})
  const Matrix half = llt.matrixL().solve(s.s);
  const Matrix full = llt.matrixL().solve(half.transpose());
  return 0.5 * p * std::log(2.0 * std::numbers::pi) + 0.5 * log_det + 0.5 * full.trace();
}

double min_neg_log_lik(const SampleCovariance& s) {
  const Eigen::LLT<Matrix> llt(s.s);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("min_neg_log_lik: sample covariance is singular");
  const Matrix l = llt.matrixL();
  const auto p = static_cast<double>(s.s.rows());
  return 0.5 * p * std::log(2.0 * std::numbers::pi) + l.diagonal().array().log().sum() + 0.5 * p;
}

SampleCovariance sample_data(const FactorModelPoint& point, long n, std::uint64_t seed) {
  return sample_data_nested(point, {n}, seed).front();
}

std::vector<SampleCovariance> sample_data_nested(const FactorModelPoint& point,
                                                 const std::vector<long>& sizes, std::uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("sample_data: no sample sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("sample_data: n must be >= 1");
    if (i > 0 && sizes[i] < sizes[i - 1]) throw std::invalid_argument("sample_data: sizes must be ascending");
  }
  const Eigen::LLT<Matrix> llt(point.sigma0());
  const Matrix chol = llt.matrixL();
  const int p = point.p();
  Rng rng(seed, 0);
  Matrix acc = Matrix::Zero(p, p);
  Vector z(p);
  std::vector<SampleCovariance> out;
  long drawn = 0;
  for (long n : sizes) {
    for (; drawn < n; ++drawn) {
      for (int j = 0; j < p; ++j) z[j] = rng.normal();
      const Vector x = chol.triangularView<Eigen::Lower>() * z;
      acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    Matrix s = acc.selfadjointView<Eigen::Lower>();
    s /= static_cast<double>(n);
    out.push_back({std::move(s), n});
  }
  return out;
}

double fiber_sos(const FactorModelPoint& point, const Matrix& lambda) {
  const int p = point.p();
  if (lambda.rows() != p) throw std::invalid_argument("fiber_sos: loading matrix must have p rows");
  double total = 0.0;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double r = lambda.row(i).dot(lambda.row(j)) - point.sigma0()(i, j);
      total += r * r;
    }
  }
  return total;
}

const char* to_string(OneFactorStratum s) {
  switch (s) {
    case OneFactorStratum::GenericA: return "generic";
    case OneFactorStratum::TwoNonzeroB: return "two-nonzero";
    case OneFactorStratum::DiagonalC: return "diagonal";
  }
  return "?";
}

OneFactorStratum classify_one_factor(const FactorModelPoint& point, double tol) {
  if (!point.provenance()) {
    throw std::invalid_argument("classify_one_factor: point carries no loadings");
  }
  const Matrix& lambda = point.provenance()->lambda();
  if (lambda.cols() != 1) throw std::invalid_argument("classify_one_factor: loadings must have one column");
  const auto nonzero = (lambda.col(0).array().abs() > tol).count();
  if (nonzero >= 3) return OneFactorStratum::GenericA;
  if (nonzero == 2) return OneFactorStratum::TwoNonzeroB;
  return OneFactorStratum::DiagonalC;
}

FactorModelPoint torus_rescale(const FactorModelPoint& point, const Vector& gamma) {
  if (gamma.size() != point.p()) throw std::invalid_argument("torus_rescale: gamma must have length p");
  if ((gamma.array() == 0.0).any()) throw std::invalid_argument("torus_rescale: gamma has a zero entry");
  const auto g = gamma.asDiagonal();
  Matrix sigma = g * point.sigma0() * g;
  std::optional<FactorParams> prov;
  if (point.provenance()) {
    const Vector psi = gamma.array().square() * point.provenance()->psi().array();
    prov.emplace(psi, g * point.provenance()->lambda());
    // Rebuild from parameters so the provenance check is exact.
    sigma = parametrize(*prov);
  }
  return FactorModelPoint(std::move(sigma), std::move(prov), point.min_rank());
}

}  // namespace rlctfa
