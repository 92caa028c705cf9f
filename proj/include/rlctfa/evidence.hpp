#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rlctfa/factor_model.hpp"
#include "rlctfa/learning_table.hpp"

namespace rlctfa {

/// Independent priors: psi_i ~ Exponential(psi_rate), Lambda_ia ~ N(0, lambda_sd^2).
struct PriorSpec {
  double psi_rate = 1.0;
  double lambda_sd = 1.0;

  void validate() const;
};

struct EvidenceEstimate {
  double log_marginal = 0.0;
  double mc_std_error = 0.0;
  long n = 0;
  int k = 0;
  long long num_draws = 0;
  std::uint64_t seed = 0;
};

enum class EvidenceMethod {
  /// Average of the likelihood over prior draws.
  PriorSampling,
  /// Defensive importance sampling: draws come from a mixture of the prior
  /// and a heavy-tailed Laplace-type proposal centred at the k-factor
  /// maximum-likelihood fit (log psi, Lambda coordinates, symmetrised over
  /// column sign flips of Lambda).
  Importance,
};

const char* to_string(EvidenceMethod m);

struct EvidenceOptions {
  unsigned threads = 1;
  std::size_t chunk_size = 4096;
  EvidenceMethod method = EvidenceMethod::PriorSampling;
  /// Importance sampling only: prior weight in the mixture, Student-t
  /// degrees of freedom, and the factor applied to the Laplace covariance.
  double defensive = 0.1;
  int t_dof = 4;
  double inflation = 2.0;
};

/// Log marginal likelihood of the k-factor model, by opts.method. With
/// PriorSampling this is the log of the prior-sample average of exp(-n * neg_log_lik(Sigma_k(psi, Lambda) | S)),
/// with n = s.n. n = 0 gives exactly 0 (the prior integrates to one).
/// Draws are evaluated in fixed-size chunks with derived seeds and combined
/// by an ordered log-sum-exp, so the result does not depend on threads.
EvidenceEstimate log_marginal_likelihood(const SampleCovariance& s, int k, const PriorSpec& prior,
                                         long long num_draws, std::uint64_t seed,
                                         const EvidenceOptions& opts = {});

/// F_n = -log L - n * min_neg_log_lik(S_n).
double watanabe_deviation(const EvidenceEstimate& est, const SampleCovariance& s);

struct SlopeFit {
  double ell_hat = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  /// Coefficient of log log n when requested; approximately -(m - 1).
  std::optional<double> loglog_coef;
};

/// Least squares F_n ~ ell * log n + c over (n, F_n) pairs. Needs at least
/// four distinct n, each >= 20.
SlopeFit fit_learning_coefficient(const std::vector<std::pair<long, double>>& points,
                                  bool with_loglog = false);

struct EvidencePoint {
  int replicate = 0;
  long n = 0;
  int k = 0;
  double log_marginal = 0.0;
  double std_error = 0.0;
  double f_n = 0.0;
};

struct EvidenceExperiment {
  std::vector<EvidencePoint> points;  // replicate-major, n ascending
  std::vector<SlopeFit> fits;         // one per replicate
};

/// For each replicate, simulates one data stream from `truth`, takes its
/// prefixes of length n for every n in `n_grid`, and estimates F_n for the
/// k-factor model. Within a replicate every n reuses the same prior draws,
/// which keeps the slope free of independent MC noise between grid points.
EvidenceExperiment run_evidence_experiment(const FactorModelPoint& truth, int k, const PriorSpec& prior,
                                           std::vector<long> n_grid, int replicates, long long num_draws,
                                           std::uint64_t seed, const EvidenceOptions& opts = {});

/// max_loglik - effective_dimension(p, k) / 2 * log n.
double bic_score(double max_loglik, int p, int k, long n);

/// Singular BIC scores, one per model k = 0..k_max, from the fixed-point
/// system of Drton and Plummer: with
///   L_ij = exp(max_loglik_i) * n^{-l_ij} * (log n)^{m_ij - 1},
/// L'_i is the positive root of sum_{j <= i} (L'_i - L_ij) L'_j = 0,
/// solved recursively in i. Returns log L'_i. Upper-bound cells use m = 1.
std::vector<double> sbic_scores(const std::vector<double>& max_logliks, int p, long n,
                                const PenaltyTable& penalties);

/// Penalty table with every cell (s, r) set to (d_s / 2, 1); sBIC then
/// reproduces BIC exactly.
PenaltyTable regular_penalties(int p, int k_max);

}  // namespace rlctfa
