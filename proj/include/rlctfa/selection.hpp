#pragma once

#include <cstdint>
#include <vector>

#include "rlctfa/factor_model.hpp"

namespace rlctfa {

struct FactorFit {
  Vector psi;
  Matrix lambda;
  double max_loglik = 0.0;  // -n * neg_log_lik(Sigma_hat | S)
  int iterations = 0;
};

/// Maximum-likelihood k-factor fit by EM, used to score candidate models.
/// k = 0 is closed form (diag(S)). For k >= 1 the best of a principal-axis
/// start and a start nested on the (k-1)-factor solution is returned, so
/// max_loglik never decreases in k.
FactorFit fit_factor_model(const SampleCovariance& s, int k, int max_iter = 5000, double tol = 1e-10);

/// All fits k = 0..k_max, each nested on the previous one.
std::vector<FactorFit> fit_factor_models(const SampleCovariance& s, int k_max, int max_iter = 5000,
                                         double tol = 1e-10);

struct SelectionConfig {
  int p = 5;
  int k_max = 2;
  int true_r = 0;
  long n = 200;
  int replicates = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Replace every sBIC penalty by (d_s / 2, 1); sBIC then equals BIC.
  bool regular_penalties = false;
};

struct SelectionResult {
  std::vector<int> bic_counts;   // per k
  std::vector<int> sbic_counts;  // per k
  int replicates = 0;

  double bic_frequency(int k) const { return static_cast<double>(bic_counts[static_cast<std::size_t>(k)]) / replicates; }
  double sbic_frequency(int k) const { return static_cast<double>(sbic_counts[static_cast<std::size_t>(k)]) / replicates; }
};

/// True covariance for the selection experiment: psi = 1 and, for r > 0,
/// a p x r loading matrix with N(0, 1) entries drawn from `seed`.
FactorModelPoint selection_truth(int p, int r, std::uint64_t seed);

/// Simulates data from selection_truth, fits every model, and counts how
/// often BIC and sBIC pick each number of factors.
SelectionResult run_selection_experiment(const SelectionConfig& cfg);

}  // namespace rlctfa
