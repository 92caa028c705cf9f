#include "rlctfa/volume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlctfa/kernels.hpp"
#include "rlctfa/parallel.hpp"
#include "rlctfa/rng.hpp"

namespace rlctfa {

namespace {

constexpr std::uint64_t kPilotStream = 0x7069'6c6f'7400ULL;

kernels::FiberProblem fiber_problem(const FactorModelPoint& point, int k) {
  kernels::FiberProblem prob;
  prob.p = point.p();
  prob.k = k;
  for (int i = 0; i < prob.p; ++i) {
    for (int j = i + 1; j < prob.p; ++j) prob.offdiag.push_back(point.sigma0()(i, j));
  }
  return prob;
}

// Uniform loadings for one chunk, structure-of-arrays, then fiber_sos.
void sample_sos(const kernels::FiberProblem& prob, double radius, Rng& rng, std::size_t n,
                std::vector<double>& lambda, std::vector<double>& sos) {
  const std::size_t entries = static_cast<std::size_t>(prob.p) * prob.k;
  lambda.resize(entries * n);
  sos.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t e = 0; e < entries; ++e) lambda[e * n + s] = rng.uniform(-radius, radius);
  }
  kernels::fiber_sos_batch(prob, lambda.data(), n, n, sos.data());
}

}  // namespace

void VolumeConfig::validate() const {
  if (!(box_radius > 0.0)) throw std::invalid_argument("VolumeConfig: box_radius must be positive");
  if (eps_grid.empty()) throw std::invalid_argument("VolumeConfig: empty eps grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw std::invalid_argument("VolumeConfig: eps must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) {
      throw std::invalid_argument("VolumeConfig: eps grid must be strictly decreasing");
    }
  }
  if (samples < 10'000) throw std::invalid_argument("VolumeConfig: need at least 1e4 samples");
  if (chunk_size == 0) throw std::invalid_argument("VolumeConfig: chunk_size must be positive");
}

double default_box_radius(const FactorModelPoint& point) {
  return 2.0 * std::sqrt(point.sigma0().diagonal().maxCoeff());
}

namespace {

// Sorted fiber_sos values of a pilot sample.
std::vector<double> pilot_sos(const FactorModelPoint& point, int k, double box_radius, std::uint64_t seed,
                              std::size_t size) {
  const auto prob = fiber_problem(point, k);
  Rng rng(seed, kPilotStream);
  std::vector<double> lambda, sos;
  sample_sos(prob, box_radius, rng, size, lambda, sos);
  std::sort(sos.begin(), sos.end());
  return sos;
}

double quantile_eps(const std::vector<double>& sorted_sos, double frac) {
  const auto q = std::min(sorted_sos.size() - 1, static_cast<std::size_t>(frac * static_cast<double>(sorted_sos.size())));
  return std::sqrt(sorted_sos[q]);
}

constexpr std::size_t kPilotSize = 200'000;

}  // namespace

std::vector<double> geometric_eps_grid(const FactorModelPoint& point, int k, double box_radius,
                                       std::uint64_t seed, double top_fraction, int points, double ratio) {
  if (!(top_fraction > 0.0 && top_fraction < 1.0) || points < 1 || !(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("geometric_eps_grid: bad fraction, point count or ratio");
  }
  const auto sos = pilot_sos(point, k, box_radius, seed, kPilotSize);
  const double eps_max = quantile_eps(sos, top_fraction);
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) grid.push_back(eps_max * std::pow(ratio, i));
  return grid;
}

std::vector<double> calibrate_eps_grid(const FactorModelPoint& point, int k, double box_radius,
                                       std::uint64_t seed, long long samples, double top_fraction, int points,
                                       long long min_count) {
  if (!(top_fraction > 0.0 && top_fraction < 1.0) || points < 2 || samples < 1 || min_count < 1) {
    throw std::invalid_argument("calibrate_eps_grid: bad fraction, point count or sample budget");
  }
  // The pilot must resolve a level well below the top one.
  const double pilot_low = std::min(1e-3, top_fraction / 10.0);
  const auto pilot = std::max(kPilotSize, static_cast<std::size_t>(200.0 / pilot_low));
  const auto sos = pilot_sos(point, k, box_radius, seed, pilot);
  const double eps_max = quantile_eps(sos, top_fraction);
  const double bottom = std::min(top_fraction, static_cast<double>(min_count) / static_cast<double>(samples));
  double eps_min;
  if (bottom >= pilot_low) {
    eps_min = quantile_eps(sos, bottom);
  } else {
    // Extrapolate below the pilot's resolution with its own slope.
    const double eps_low = quantile_eps(sos, pilot_low);
    double slope = std::log(top_fraction / pilot_low) / std::log(eps_max / eps_low);
    if (!std::isfinite(slope) || slope <= 0.0) slope = 1.0;
    eps_min = eps_low * std::pow(bottom / pilot_low, 1.0 / slope);
  }
  if (!(eps_min > 0.0) || !(eps_min < eps_max)) eps_min = eps_max * 1e-2;
  std::vector<double> grid;
  const double step = std::log(eps_min / eps_max) / (points - 1);
  for (int i = 0; i < points; ++i) grid.push_back(eps_max * std::exp(step * i));
  return grid;
}

VolumeConfig default_volume_config(const FactorModelPoint& point, int k, long long samples,
                                   std::uint64_t seed, unsigned threads) {
  VolumeConfig cfg;
  cfg.box_radius = default_box_radius(point);
  cfg.eps_grid = calibrate_eps_grid(point, k, cfg.box_radius, seed, samples);
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

VolumeEstimate estimate_levelset_volumes(const FactorModelPoint& point, int k, const VolumeConfig& cfg) {
  cfg.validate();
  if (k < 1 || k > point.p()) throw std::invalid_argument("estimate_levelset_volumes: need 1 <= k <= p");
  const auto prob = fiber_problem(point, k);
  const std::size_t levels = cfg.eps_grid.size();
  std::vector<double> thresholds(levels);
  for (std::size_t e = 0; e < levels; ++e) thresholds[e] = cfg.eps_grid[e] * cfg.eps_grid[e];

  const auto total = static_cast<std::size_t>(cfg.samples);
  const std::size_t chunks = (total + cfg.chunk_size - 1) / cfg.chunk_size;
  std::vector<std::vector<long long>> partial(chunks, std::vector<long long>(levels, 0));

  for_each_chunk(chunks, cfg.threads, [&](std::size_t c) {
    const std::size_t begin = c * cfg.chunk_size;
    const std::size_t n = std::min(cfg.chunk_size, total - begin);
    Rng rng(cfg.seed, c);
    std::vector<double> lambda, sos;
    sample_sos(prob, cfg.box_radius, rng, n, lambda, sos);
    auto& counts = partial[c];
    for (double v : sos) {
      // Thresholds decrease, so stop at the first level v misses.
      for (std::size_t e = 0; e < levels && v < thresholds[e]; ++e) ++counts[e];
    }
  });

  VolumeEstimate est;
  est.eps = cfg.eps_grid;
  est.samples = cfg.samples;
  est.counts.assign(levels, 0);
  for (const auto& part : partial) {
    for (std::size_t e = 0; e < levels; ++e) est.counts[e] += part[e];
  }
  const auto n = static_cast<double>(cfg.samples);
  for (std::size_t e = 0; e < levels; ++e) {
    const double f = static_cast<double>(est.counts[e]) / n;
    est.fraction.push_back(f);
    est.std_error.push_back(std::sqrt(f * (1.0 - f) / n));
    if (est.counts[e] == 0) est.empty_levels.push_back(e);
  }
  return est;
}

ExponentFit fit_exponent(const VolumeEstimate& estimate, bool loglog_correction) {
  std::vector<std::size_t> use;
  for (std::size_t e = 0; e < estimate.eps.size(); ++e) {
    if (estimate.counts[e] > 0 && estimate.counts[e] < estimate.samples) use.push_back(e);
  }
  if (use.size() < 3) throw std::runtime_error("fit_exponent: fewer than 3 usable levels");
  if (loglog_correction) {
    for (std::size_t e : use) {
      if (!(estimate.eps[e] < 1.0)) throw std::runtime_error("fit_exponent: log log(1/eps) needs eps < 1");
    }
  }
  const auto m = static_cast<Eigen::Index>(use.size());
  const Eigen::Index q = loglog_correction ? 3 : 2;
  if (m < q) throw std::runtime_error("fit_exponent: too few levels for the regression");
  Matrix x(m, q);
  Vector y(m), mc_var(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t e = use[static_cast<std::size_t>(i)];
    const double eps = estimate.eps[e];
    x(i, 0) = 1.0;
    x(i, 1) = std::log(eps);
    if (loglog_correction) x(i, 2) = std::log(std::log(1.0 / eps));
    y[i] = std::log(estimate.fraction[e]);
    // Delta method: Var(log f) = (1 - f) / count.
    mc_var[i] = (1.0 - estimate.fraction[e]) / static_cast<double>(estimate.counts[e]);
  }
  const Matrix xtx_inv = (x.transpose() * x).inverse();
  const Vector beta = xtx_inv * x.transpose() * y;
  const Vector resid = y - x * beta;

  ExponentFit fit;
  fit.ell_hat = beta[1];
  fit.points_used = use.size();
  fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
  const Matrix sandwich = xtx_inv * x.transpose() * mc_var.asDiagonal() * x * xtx_inv;
  double var = sandwich(1, 1);
  if (m > q) var += resid.squaredNorm() / static_cast<double>(m - q) * xtx_inv(1, 1);
  fit.std_error = std::sqrt(var);
  if (loglog_correction) fit.mult_minus_one = beta[2];
  return fit;
}

FiberRlctEstimate estimate_fiber_rlct(const FactorModelPoint& point, int k, const VolumeConfig& cfg) {
  FiberRlctEstimate out;
  out.volumes = estimate_levelset_volumes(point, k, cfg);
  out.fit = fit_exponent(out.volumes);
  out.learning_hat = (out.fit.ell_hat + point.p()) / 2.0;
  return out;
}

}  // namespace rlctfa
