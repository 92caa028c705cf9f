#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rlctfa/evidence.hpp"
#include "rlctfa/logsumexp.hpp"
#include "rlctfa/parallel.hpp"
#include "rlctfa/rng.hpp"
#include "rlctfa/selection.hpp"

namespace rlctfa {

std::vector<double> sbic_scores(const std::vector<double>& max_logliks, int p, long n,
                                const PenaltyTable& penalties) {
  const int k_max = static_cast<int>(max_logliks.size()) - 1;
  if (k_max < 0) throw std::invalid_argument("sbic_scores: no models");
  if (penalties.k_max() < k_max || penalties.p() != p) {
    throw std::invalid_argument("sbic_scores: penalty table does not cover the models");
  }
  if (n < 2) throw std::invalid_argument("sbic_scores: need n >= 2");
  for (double v : max_logliks) {
    if (!std::isfinite(v)) throw std::invalid_argument("sbic_scores: non-finite log-likelihood");
  }
  const double log_n = std::log(static_cast<double>(n));
  const double loglog_n = std::log(log_n);

  auto log_l = [&](int i, int j) {
    const auto& cell = penalties.at(i, j);
    return max_logliks[static_cast<std::size_t>(i)] - cell.value().to_double() * log_n +
           (cell.mult_or_one() - 1) * loglog_n;
  };

  // L'_i^2 - b L'_i - c = 0 with b = L_ii - sum_{j<i} L'_j and
  // c = sum_{j<i} L_ij L'_j, solved after rescaling by exp(shift).
  std::vector<double> out;
  for (int i = 0; i <= k_max; ++i) {
    const double lii = log_l(i, i);
    double shift = lii;
    for (int j = 0; j < i; ++j) {
      shift = std::max(shift, out[static_cast<std::size_t>(j)]);
      shift = std::max(shift, 0.5 * (log_l(i, j) + out[static_cast<std::size_t>(j)]));
    }
    double b = std::exp(lii - shift);
    LogSumExp c_terms;
    for (int j = 0; j < i; ++j) {
      const double lj = out[static_cast<std::size_t>(j)];
      b -= std::exp(lj - shift);
      c_terms.add(log_l(i, j) + lj - 2.0 * shift);
    }
    // c may underflow in this scale when the models are far apart; keep
    // its log for the small-root branch.
    const double log_c = i == 0 ? -std::numeric_limits<double>::infinity() : c_terms.max + std::log(c_terms.sum);
    const double c = std::exp(log_c);
    const double disc = std::sqrt(b * b + 4.0 * c);
    // Cancellation-free positive root.
    const double log_root = b >= 0.0 ? std::log(0.5 * (b + disc)) : std::log(2.0) + log_c - std::log(disc - b);
    if (!std::isfinite(log_root)) throw std::runtime_error("sbic_scores: no positive root");
    out.push_back(shift + log_root);
  }
  return out;
}

PenaltyTable regular_penalties(int p, int k_max) {
  PenaltyTable table(p, k_max);
  for (int s = 0; s <= k_max; ++s) {
    const Rational half_dim(model_dimension(p, s).effective, 2);
    for (int r = 0; r <= s; ++r) table.set(s, r, LearningCoefficient::exact(half_dim, 1));
  }
  return table;
}

FactorModelPoint selection_truth(int p, int r, std::uint64_t seed) {
  if (r < 0 || r > p) throw std::invalid_argument("selection_truth: need 0 <= r <= p");
  Matrix lambda(p, r);
  Rng rng(seed, 0x7472757468ULL);
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < r; ++a) lambda(i, a) = rng.normal();
  }
  return FactorModelPoint::from_params(FactorParams(Vector::Ones(p), lambda), r);
}

SelectionResult run_selection_experiment(const SelectionConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("run_selection_experiment: need replicates >= 1");
  if (cfg.k_max < 0 || cfg.k_max > cfg.p || cfg.true_r < 0 || cfg.true_r > cfg.p) {
    throw std::invalid_argument("run_selection_experiment: bad p / k_max / true_r");
  }
  const auto truth = selection_truth(cfg.p, cfg.true_r, cfg.seed);
  const PenaltyTable penalties =
      cfg.regular_penalties ? regular_penalties(cfg.p, cfg.k_max) : sbic_penalty_matrix(cfg.p, cfg.k_max);

  std::vector<int> bic_pick(static_cast<std::size_t>(cfg.replicates));
  std::vector<int> sbic_pick(static_cast<std::size_t>(cfg.replicates));
  for_each_chunk(static_cast<std::size_t>(cfg.replicates), cfg.threads, [&](std::size_t rep) {
    const auto s = sample_data(truth, cfg.n, stream_seed(cfg.seed, rep + 1));
    const auto fits = fit_factor_models(s, cfg.k_max);
    std::vector<double> ll;
    for (const auto& f : fits) ll.push_back(f.max_loglik);
    std::vector<double> bic;
    for (int k = 0; k <= cfg.k_max; ++k) bic.push_back(bic_score(ll[static_cast<std::size_t>(k)], cfg.p, k, cfg.n));
    const auto sbic = sbic_scores(ll, cfg.p, cfg.n, penalties);
    bic_pick[rep] = static_cast<int>(std::max_element(bic.begin(), bic.end()) - bic.begin());
    sbic_pick[rep] = static_cast<int>(std::max_element(sbic.begin(), sbic.end()) - sbic.begin());
  });

  SelectionResult res;
  res.replicates = cfg.replicates;
  res.bic_counts.assign(static_cast<std::size_t>(cfg.k_max) + 1, 0);
  res.sbic_counts.assign(static_cast<std::size_t>(cfg.k_max) + 1, 0);
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    ++res.bic_counts[static_cast<std::size_t>(bic_pick[static_cast<std::size_t>(rep)])];
    ++res.sbic_counts[static_cast<std::size_t>(sbic_pick[static_cast<std::size_t>(rep)])];
  }
  return res;
}

}  // namespace rlctfa
