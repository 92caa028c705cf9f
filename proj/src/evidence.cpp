#include "rlctfa/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "rlctfa/kernels.hpp"
#include "rlctfa/logsumexp.hpp"
#include "rlctfa/parallel.hpp"
#include "rlctfa/rng.hpp"
#include "rlctfa/selection.hpp"

namespace rlctfa {

void PriorSpec::validate() const {
  if (!(psi_rate > 0.0) || !(lambda_sd > 0.0)) {
    throw std::invalid_argument("PriorSpec: rate and standard deviation must be positive");
  }
}


const char* to_string(EvidenceMethod m) {
  return m == EvidenceMethod::Importance ? "importance" : "prior";
}

namespace {

EvidenceEstimate finish_estimate(EvidenceEstimate est, const std::vector<LogSumExp>& partial) {
  LogSumExp acc;
  for (const auto& part : partial) acc.merge(part);
  if (!(acc.sum > 0.0)) {
    throw std::runtime_error("log_marginal_likelihood: every draw underflowed; increase draws or lower n");
  }
  est.log_marginal = acc.log_mean(est.num_draws);
  est.mc_std_error = acc.log_mean_std_error(est.num_draws);
  return est;
}

// Importance proposal in z = (log psi_1..p, Lambda row-major).
struct Proposal {
  int p = 0;
  int k = 0;
  Vector mean;
  Matrix chol;          // lower factor of the t scale matrix
  double log_norm = 0;  // log of the t density normaliser incl. det
  int dof = 4;
  int sign_patterns = 1;  // 2^k when symmetrised, else 1
};

double nll_at(const Vector& z, int p, int k, const SampleCovariance& s) {
  Matrix lambda(p, k);
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < k; ++a) lambda(i, a) = z[p + i * k + a];
  }
  Matrix sigma = lambda * lambda.transpose();
  for (int i = 0; i < p; ++i) sigma(i, i) += std::exp(z[i]);
  try {
    return neg_log_lik(sigma, s);
  } catch (const NotPositiveDefinite&) {
    return std::numeric_limits<double>::infinity();
  }
}

Proposal build_proposal(const SampleCovariance& s, int k, const PriorSpec& prior, const EvidenceOptions& opts) {
  const int p = static_cast<int>(s.s.rows());
  const int d = p + p * k;
  const FactorFit fit = fit_factor_model(s, k);
  Proposal prop;
  prop.p = p;
  prop.k = k;
  prop.dof = opts.t_dof;
  prop.sign_patterns = (k >= 1 && k <= 4) ? (1 << k) : 1;
  prop.mean.resize(d);
  for (int i = 0; i < p; ++i) prop.mean[i] = std::log(fit.psi[i]);
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < k; ++a) prop.mean[p + i * k + a] = fit.lambda(i, a);
  }

  // Central-difference Hessian of n * nll, clipped to PSD, plus the prior's
  // curvature in these coordinates.
  const double h = 1e-4;
  const double n = static_cast<double>(s.n);
  Matrix hess(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Vector z = prop.mean;
      auto at = [&](double di, double dj) {
        Vector w = z;
        w[i] += di;
        w[j] += dj;
        return nll_at(w, p, k, s);
      };
      const double v = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
      hess(i, j) = hess(j, i) = n * v;
    }
  }
  if (!hess.allFinite()) hess.setZero();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hess);
  Matrix precision = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
  for (int i = 0; i < p; ++i) precision(i, i) += prior.psi_rate * fit.psi[i];
  for (int e = p; e < d; ++e) precision(e, e) += 1.0 / (prior.lambda_sd * prior.lambda_sd);
  const Matrix cov = opts.inflation * precision.inverse();
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("log_marginal_likelihood: proposal covariance not PD");
  prop.chol = llt.matrixL();
  const double nu = prop.dof;
  prop.log_norm = std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) - 0.5 * d * std::log(nu * M_PI) -
                  prop.chol.diagonal().array().log().sum();
  return prop;
}

double log_t_density(const Proposal& prop, const Vector& z) {
  const Vector y = prop.chol.triangularView<Eigen::Lower>().solve(z - prop.mean);
  const double d = static_cast<double>(z.size());
  return prop.log_norm - 0.5 * (prop.dof + d) * std::log1p(y.squaredNorm() / prop.dof);
}

// Average of the t density over Lambda column sign flips.
double log_sym_density(const Proposal& prop, const Vector& z) {
  if (prop.sign_patterns == 1) return log_t_density(prop, z);
  LogSumExp acc;
  Vector w = z;
  for (int mask = 0; mask < prop.sign_patterns; ++mask) {
    for (int i = 0; i < prop.p; ++i) {
      for (int a = 0; a < prop.k; ++a) {
        const double v = z[prop.p + i * prop.k + a];
        w[prop.p + i * prop.k + a] = (mask >> a) & 1 ? -v : v;
      }
    }
    acc.add(log_t_density(prop, w));
  }
  return acc.max + std::log(acc.sum / prop.sign_patterns);
}

double log_prior_density(const PriorSpec& prior, const Vector& z, int p) {
  double lp = 0.0;
  for (int i = 0; i < p; ++i) lp += std::log(prior.psi_rate) - prior.psi_rate * std::exp(z[i]);
  const double c = -0.5 * std::log(2.0 * M_PI) - std::log(prior.lambda_sd);
  for (Eigen::Index e = p; e < z.size(); ++e) {
    const double t = z[e] / prior.lambda_sd;
    lp += c - 0.5 * t * t;
  }
  return lp;
}

}  // namespace

EvidenceEstimate log_marginal_likelihood(const SampleCovariance& s, int k, const PriorSpec& prior,
                                         long long num_draws, std::uint64_t seed,
                                         const EvidenceOptions& opts) {
  prior.validate();
  const int p = static_cast<int>(s.s.rows());
  if (k < 0 || k > p) throw std::invalid_argument("log_marginal_likelihood: need 0 <= k <= p");
  if (num_draws < 1000) throw std::invalid_argument("log_marginal_likelihood: need at least 1000 draws");
  if (s.n < 0) throw std::invalid_argument("log_marginal_likelihood: negative sample size");
  if (opts.chunk_size == 0) throw std::invalid_argument("log_marginal_likelihood: chunk_size must be positive");
  if (opts.method == EvidenceMethod::Importance &&
      (!(opts.defensive > 0.0 && opts.defensive <= 1.0) || opts.t_dof < 1 || !(opts.inflation > 0.0))) {
    throw std::invalid_argument("log_marginal_likelihood: bad importance-sampling options");
  }

  EvidenceEstimate est;
  est.n = s.n;
  est.k = k;
  est.num_draws = num_draws;
  est.seed = seed;
  if (s.n == 0) return est;

  const auto prob = kernels::make_nll_problem(p, k, std::span<const double>(s.s.data(), s.s.size()));
  const auto total = static_cast<std::size_t>(num_draws);
  const std::size_t chunks = (total + opts.chunk_size - 1) / opts.chunk_size;
  std::vector<LogSumExp> partial(chunks);
  const double n = static_cast<double>(s.n);
  const auto lambda_entries = static_cast<std::size_t>(p) * static_cast<std::size_t>(k);
  const bool importance = opts.method == EvidenceMethod::Importance;
  const Proposal prop = importance ? build_proposal(s, k, prior, opts) : Proposal{};
  const int d = p + static_cast<int>(lambda_entries);

  for_each_chunk(chunks, opts.threads, [&](std::size_t c) {
    const std::size_t m = std::min(opts.chunk_size, total - c * opts.chunk_size);
    Rng rng(seed, c);
    std::vector<double> psi(static_cast<std::size_t>(p) * m), lambda(std::max<std::size_t>(1, lambda_entries * m));
    std::vector<double> log_ratio(m, 0.0);  // log prior - log proposal
    if (!importance) {
      for (std::size_t t = 0; t < m; ++t) {
        for (int i = 0; i < p; ++i) psi[static_cast<std::size_t>(i) * m + t] = rng.exponential(prior.psi_rate);
        for (std::size_t e = 0; e < lambda_entries; ++e) lambda[e * m + t] = prior.lambda_sd * rng.normal();
      }
    } else {
      Vector z(d), x(d);
      for (std::size_t t = 0; t < m; ++t) {
        if (rng.uniform() < opts.defensive) {
          for (int i = 0; i < p; ++i) z[i] = std::log(rng.exponential(prior.psi_rate));
          for (int e = p; e < d; ++e) z[e] = prior.lambda_sd * rng.normal();
        } else {
          for (int e = 0; e < d; ++e) x[e] = rng.normal();
          double chi2 = 0.0;
          for (int r = 0; r < prop.dof; ++r) {
            const double g = rng.normal();
            chi2 += g * g;
          }
          z = prop.mean + prop.chol * x * std::sqrt(prop.dof / chi2);
          for (int a = 0; a < k && prop.sign_patterns > 1; ++a) {
            if (rng.uniform() < 0.5) {
              for (int i = 0; i < p; ++i) z[p + i * k + a] = -z[p + i * k + a];
            }
          }
        }
        const double lp = log_prior_density(prior, z, p);
        const double log_jac = z.head(p).sum();  // d psi = psi du
        const double lg = log_sym_density(prop, z) - log_jac;
        const double hi = std::max(lp, lg);
        if (hi == -std::numeric_limits<double>::infinity()) {
          log_ratio[t] = -std::numeric_limits<double>::infinity();
          continue;
        }
        const double lq = hi + std::log(opts.defensive * std::exp(lp - hi) + (1.0 - opts.defensive) * std::exp(lg - hi));
        log_ratio[t] = lp - lq;
        for (int i = 0; i < p; ++i) psi[static_cast<std::size_t>(i) * m + t] = std::exp(z[i]);
        for (std::size_t e = 0; e < lambda_entries; ++e) lambda[e * m + t] = z[p + static_cast<Eigen::Index>(e)];
      }
    }
    std::vector<double> nll(m);
    kernels::nll_batch(prob, psi.data(), lambda.data(), m, m, nll.data());
    for (std::size_t t = 0; t < m; ++t) partial[c].add(log_ratio[t] - n * nll[t]);
  });

  return finish_estimate(est, partial);
}

double watanabe_deviation(const EvidenceEstimate& est, const SampleCovariance& s) {
  return -est.log_marginal - static_cast<double>(s.n) * min_neg_log_lik(s);
}

SlopeFit fit_learning_coefficient(const std::vector<std::pair<long, double>>& points, bool with_loglog) {
  std::set<long> distinct;
  for (const auto& [n, f] : points) {
    if (n < 20) throw std::invalid_argument("fit_learning_coefficient: every n must be >= 20");
    if (!std::isfinite(f)) throw std::invalid_argument("fit_learning_coefficient: non-finite F_n");
    distinct.insert(n);
  }
  if (distinct.size() < 4) throw std::invalid_argument("fit_learning_coefficient: need at least 4 distinct n");
  const auto m = static_cast<Eigen::Index>(points.size());
  const Eigen::Index q = with_loglog ? 3 : 2;
  // Regressors are centred for conditioning; the intercept is recovered after.
  Vector ln(m), lln(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    ln[i] = std::log(static_cast<double>(points[static_cast<std::size_t>(i)].first));
    lln[i] = std::log(ln[i]);
  }
  const double ln_mean = ln.mean(), lln_mean = lln.mean();
  Matrix x(m, q);
  Vector y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = ln[i] - ln_mean;
    if (with_loglog) x(i, 2) = lln[i] - lln_mean;
    y[i] = points[static_cast<std::size_t>(i)].second;
  }
  const Matrix xtx = x.transpose() * x;
  Eigen::FullPivLU<Matrix> lu(xtx);
  if (!lu.isInvertible()) throw std::invalid_argument("fit_learning_coefficient: degenerate design");
  const Matrix xtx_inv = lu.inverse();
  const Vector beta = x.colPivHouseholderQr().solve(y);
  const Vector resid = y - x * beta;
  SlopeFit fit;
  fit.ell_hat = beta[1];
  fit.intercept = beta[0] - beta[1] * ln_mean;
  fit.std_error = m > q ? std::sqrt(resid.squaredNorm() / static_cast<double>(m - q) * xtx_inv(1, 1)) : 0.0;
  if (with_loglog) {
    fit.loglog_coef = beta[2];
    fit.intercept -= beta[2] * lln_mean;
  }
  return fit;
}

EvidenceExperiment run_evidence_experiment(const FactorModelPoint& truth, int k, const PriorSpec& prior,
                                           std::vector<long> n_grid, int replicates, long long num_draws,
                                           std::uint64_t seed, const EvidenceOptions& opts) {
  if (replicates < 1) throw std::invalid_argument("run_evidence_experiment: need replicates >= 1");
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  EvidenceExperiment out;
  for (int rep = 0; rep < replicates; ++rep) {
    const std::uint64_t rep_seed = stream_seed(seed, static_cast<std::uint64_t>(rep) + 1);
    const auto data = sample_data_nested(truth, n_grid, stream_seed(rep_seed, 0));
    const std::uint64_t draw_seed = stream_seed(rep_seed, 1);
    std::vector<std::pair<long, double>> series;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const auto est = log_marginal_likelihood(data[i], k, prior, num_draws, draw_seed, opts);
      const double f = watanabe_deviation(est, data[i]);
      out.points.push_back({rep, n_grid[i], k, est.log_marginal, est.mc_std_error, f});
      series.emplace_back(n_grid[i], f);
    }
    out.fits.push_back(fit_learning_coefficient(series));
  }
  return out;
}

double bic_score(double max_loglik, int p, int k, long n) {
  if (n < 1) throw std::invalid_argument("bic_score: n must be >= 1");
  const auto dim = model_dimension(p, k);
  return max_loglik - 0.5 * static_cast<double>(dim.effective) * std::log(static_cast<double>(n));
}

}  // namespace rlctfa
