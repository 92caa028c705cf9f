#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rlctfa/kernels.hpp"

namespace rlctfa::kernels {

NllProblem make_nll_problem(int p, int k, std::span<const double> s) {
  if (p < 1 || p > 16 || k < 0 || k > 16) throw std::invalid_argument("make_nll_problem: need 1 <= p <= 16, 0 <= k <= 16");
  if (s.size() != static_cast<std::size_t>(p) * p) throw std::invalid_argument("make_nll_problem: S must be p x p");
  NllProblem prob;
  prob.p = p;
  prob.k = k;
  prob.chol_s.assign(static_cast<std::size_t>(p) * p, 0.0);
  auto& c = prob.chol_s;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = s[i * p + j];
      for (int m = 0; m < j; ++m) v -= c[i * p + m] * c[j * p + m];
      if (i == j) {
        if (!(v > 0.0)) throw std::domain_error("make_nll_problem: sample covariance is not positive definite");
        c[i * p + i] = std::sqrt(v);
      } else {
        c[i * p + j] = v / c[j * p + j];
      }
    }
  }
  prob.log_2pi_half_p = 0.5 * p * std::log(2.0 * std::numbers::pi);
  return prob;
}

namespace scalar {

void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out) {
  const int p = prob.p;
  const int k = prob.k;
  for (std::size_t s = 0; s < count; ++s) {
    double acc = 0.0;
    std::size_t pair = 0;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j, ++pair) {
        double dot = 0.0;
        for (int a = 0; a < k; ++a) {
          dot = dot + lambda[(i * k + a) * stride + s] * lambda[(j * k + a) * stride + s];
        }
        const double r = dot - prob.offdiag[pair];
        acc = acc + r * r;
      }
    }
    out[s] = acc;
  }
}

void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out) {
  const int p = prob.p;
  const int k = prob.k;
  double l[16 * 16];
  double y[16];
  for (std::size_t s = 0; s < count; ++s) {
    bool pd = true;
    for (int i = 0; i < p && pd; ++i) {
      for (int j = 0; j <= i; ++j) {
        double v = 0.0;
        for (int a = 0; a < k; ++a) {
          v = v + lambda[(i * k + a) * stride + s] * lambda[(j * k + a) * stride + s];
        }
        if (i == j) v = v + psi[i * stride + s];
        for (int m = 0; m < j; ++m) v = v - l[i * 16 + m] * l[j * 16 + m];
        if (i == j) {
          if (!(v > 0.0)) {
            pd = false;
            break;
          }
          l[i * 16 + i] = std::sqrt(v);
        } else {
          l[i * 16 + j] = v / l[j * 16 + j];
        }
      }
    }
    if (!pd) {
      out[s] = std::numeric_limits<double>::infinity();
      continue;
    }
    double log_det_half = 0.0;
    for (int i = 0; i < p; ++i) log_det_half = log_det_half + std::log(l[i * 16 + i]);
    double trace = 0.0;
    for (int c = 0; c < p; ++c) {
      for (int i = c; i < p; ++i) {
        double v = prob.chol_s[i * p + c];
        for (int m = c; m < i; ++m) v = v - l[i * 16 + m] * y[m];
        y[i] = v / l[i * 16 + i];
        trace = trace + y[i] * y[i];
      }
    }
    out[s] = (prob.log_2pi_half_p + log_det_half) + 0.5 * trace;
  }
}

}  // namespace scalar
}  // namespace rlctfa::kernels
