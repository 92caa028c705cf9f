#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlctfa/factor_model.hpp"

namespace rlctfa {

/// Monte-Carlo setup for level-set volumes of the reduced fiber ideal over
/// the loading box [-R, R]^{p x k}.
struct VolumeConfig {
  double box_radius = 1.0;
  std::vector<double> eps_grid;  // strictly decreasing
  long long samples = 10'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t chunk_size = 1 << 16;

  void validate() const;
};

/// 2 * sqrt(max diagonal entry of Sigma0).
double default_box_radius(const FactorModelPoint& point);

/// eps_max * ratio^i, i = 0..points-1, with eps_max set so that a pilot
/// sample puts `top_fraction` of the box below eps_max^2.
std::vector<double> geometric_eps_grid(const FactorModelPoint& point, int k, double box_radius,
                                       std::uint64_t seed, double top_fraction = 0.1, int points = 6,
                                       double ratio = 0.31622776601683794);

/// Geometric grid of `points` levels from eps_max down to eps_min. A pilot
/// sample puts `top_fraction` of the box below eps_max^2; eps_min is chosen
/// so that about `min_count` of `samples` draws fall below it, extrapolating
/// with the pilot's own slope when that is beyond the pilot's resolution.
std::vector<double> calibrate_eps_grid(const FactorModelPoint& point, int k, double box_radius,
                                       std::uint64_t seed, long long samples, double top_fraction = 0.05,
                                       int points = 6, long long min_count = 1000);

VolumeConfig default_volume_config(const FactorModelPoint& point, int k, long long samples,
                                   std::uint64_t seed, unsigned threads = 1);

struct VolumeEstimate {
  std::vector<double> eps;
  std::vector<long long> counts;
  long long samples = 0;
  std::vector<double> fraction;
  std::vector<double> std_error;
  /// Indices whose count is zero; they are skipped by the fit.
  std::vector<std::size_t> empty_levels;
};

/// Fraction of uniform loadings with fiber_sos < eps^2, per eps, with
/// binomial standard errors. Deterministic in cfg.seed for any thread count.
VolumeEstimate estimate_levelset_volumes(const FactorModelPoint& point, int k, const VolumeConfig& cfg);

struct ExponentFit {
  double ell_hat = 0.0;
  double std_error = 0.0;
  double residual_rms = 0.0;
  std::size_t points_used = 0;
  /// Coefficient of log log(1/eps), an estimate of m - 1. Diagnostic only.
  std::optional<double> mult_minus_one;
};

/// Least-squares slope of log V against log eps over levels with
/// 0 < count < samples. With `loglog_correction`, log log(1/eps) is an
/// extra regressor. Throws std::runtime_error with fewer than 3 levels.
ExponentFit fit_exponent(const VolumeEstimate& estimate, bool loglog_correction = false);

struct FiberRlctEstimate {
  VolumeEstimate volumes;
  ExponentFit fit;
  double learning_hat = 0.0;  // (ell_hat + p) / 2
};

FiberRlctEstimate estimate_fiber_rlct(const FactorModelPoint& point, int k, const VolumeConfig& cfg);

}  // namespace rlctfa
