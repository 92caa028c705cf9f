#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlctfa/selection.hpp"

namespace rlctfa {

namespace {

double loglik(const Vector& psi, const Matrix& lambda, const SampleCovariance& s) {
  Matrix sigma = lambda * lambda.transpose();
  sigma.diagonal() += psi;
  return -static_cast<double>(s.n) * neg_log_lik(sigma, s);
}

// Rubin-Thayer EM from the given start. psi is floored at a small fraction
// of diag(S) to stay away from Heywood boundaries.
FactorFit run_em(const SampleCovariance& s, Vector psi, Matrix lambda, int max_iter, double tol) {
  const Eigen::Index p = s.s.rows();
  const Eigen::Index k = lambda.cols();
  const Vector floor = 1e-6 * s.s.diagonal();
  double prev = loglik(psi, lambda, s);
  int it = 0;
  for (; it < max_iter; ++it) {
    Matrix sigma = lambda * lambda.transpose();
    sigma.diagonal() += psi;
    const Eigen::LLT<Matrix> llt(sigma);
    const Matrix beta = llt.solve(lambda).transpose();  // k x p
    const Matrix sb = s.s * beta.transpose();            // p x k
    const Matrix czz = Matrix::Identity(k, k) - beta * lambda + beta * sb;
    lambda = sb * czz.inverse();
    const Matrix cross = lambda * sb.transpose();
    for (Eigen::Index i = 0; i < p; ++i) psi[i] = std::max(s.s(i, i) - cross(i, i), floor[i]);
    const double cur = loglik(psi, lambda, s);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) {
      prev = cur;
      ++it;
      break;
    }
    prev = cur;
  }
  return {std::move(psi), std::move(lambda), prev, it};
}

FactorFit principal_axis_start(const SampleCovariance& s, int k, int max_iter, double tol) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(s.s);
  const Eigen::Index p = s.s.rows();
  Matrix lambda(p, k);
  for (int a = 0; a < k; ++a) {
    const Eigen::Index col = p - 1 - a;  // eigenvalues ascending
    lambda.col(a) = eig.eigenvectors().col(col) * std::sqrt(std::max(eig.eigenvalues()[col] * 0.5, 1e-8));
  }
  Vector psi = (s.s.diagonal() - lambda.rowwise().squaredNorm()).cwiseMax(0.1 * s.s.diagonal());
  return run_em(s, std::move(psi), std::move(lambda), max_iter, tol);
}

FactorFit zero_factor_fit(const SampleCovariance& s) {
  const Eigen::Index p = s.s.rows();
  Vector psi = s.s.diagonal();
  Matrix lambda(p, 0);
  const double ll = loglik(psi, lambda, s);
  return {std::move(psi), std::move(lambda), ll, 0};
}

}  // namespace

FactorFit fit_factor_model(const SampleCovariance& s, int k, int max_iter, double tol) {
  auto fits = fit_factor_models(s, k, max_iter, tol);
  return std::move(fits.back());
}

std::vector<FactorFit> fit_factor_models(const SampleCovariance& s, int k_max, int max_iter, double tol) {
  const int p = static_cast<int>(s.s.rows());
  if (k_max < 0 || k_max > p) throw std::invalid_argument("fit_factor_models: need 0 <= k <= p");
  if (s.n < 1) throw std::invalid_argument("fit_factor_models: need n >= 1");
  std::vector<FactorFit> fits;
  fits.push_back(zero_factor_fit(s));
  for (int k = 1; k <= k_max; ++k) {
    FactorFit best = principal_axis_start(s, k, max_iter, tol);
    const FactorFit& prev = fits.back();
    Matrix lambda(p, k);
    lambda.leftCols(k - 1) = prev.lambda;
    // A zero column is a fixed point of EM, so nudge it.
    for (int i = 0; i < p; ++i) lambda(i, k - 1) = 1e-3 * (i % 2 == 0 ? 1.0 : -1.0) * std::sqrt(s.s(i, i));
    FactorFit nested = run_em(s, prev.psi, std::move(lambda), max_iter, tol);
    if (nested.max_loglik > best.max_loglik) best = std::move(nested);
    if (best.max_loglik < prev.max_loglik) {
      // Embed the smaller model exactly.
      best.psi = prev.psi;
      best.lambda = Matrix::Zero(p, k);
      best.lambda.leftCols(k - 1) = prev.lambda;
      best.max_loglik = prev.max_loglik;
    }
    fits.push_back(std::move(best));
  }
  return fits;
}

}  // namespace rlctfa
