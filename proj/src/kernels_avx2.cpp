// Compiled with -mavx2 -mfma -ffp-contract=off; only reached after a
// runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "rlctfa/kernels.hpp"

namespace rlctfa::kernels::avx2 {

bool compiled() { return true; }

void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out) {
  const int p = prob.p;
  const int k = prob.k;
  const std::size_t body = count - count % 4;
  for (std::size_t s = 0; s < body; s += 4) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t pair = 0;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j, ++pair) {
        __m256d dot = _mm256_setzero_pd();
        for (int a = 0; a < k; ++a) {
          const __m256d li = _mm256_loadu_pd(lambda + (i * k + a) * stride + s);
          const __m256d lj = _mm256_loadu_pd(lambda + (j * k + a) * stride + s);
          dot = _mm256_add_pd(dot, _mm256_mul_pd(li, lj));
        }
        const __m256d r = _mm256_sub_pd(dot, _mm256_set1_pd(prob.offdiag[pair]));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(r, r));
      }
    }
    _mm256_storeu_pd(out + s, acc);
  }
  if (body < count) scalar::fiber_sos_batch(prob, lambda + body, count - body, stride, out + body);
}

void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out) {
  const int p = prob.p;
  const int k = prob.k;
  alignas(32) __m256d l[16 * 16];
  alignas(32) __m256d y[16];
  alignas(32) double lanes[4];
  const std::size_t body = count - count % 4;
  for (std::size_t s = 0; s < body; s += 4) {
    bool pd = true;
    for (int i = 0; i < p && pd; ++i) {
      for (int j = 0; j <= i; ++j) {
        __m256d v = _mm256_setzero_pd();
        for (int a = 0; a < k; ++a) {
          const __m256d li = _mm256_loadu_pd(lambda + (i * k + a) * stride + s);
          const __m256d lj = _mm256_loadu_pd(lambda + (j * k + a) * stride + s);
          v = _mm256_add_pd(v, _mm256_mul_pd(li, lj));
        }
        if (i == j) v = _mm256_add_pd(v, _mm256_loadu_pd(psi + i * stride + s));
        for (int m = 0; m < j; ++m) v = _mm256_sub_pd(v, _mm256_mul_pd(l[i * 16 + m], l[j * 16 + m]));
        if (i == j) {
          const __m256d positive = _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_GT_OQ);
          if (_mm256_movemask_pd(positive) != 0xF) {
            pd = false;
            break;
          }
          l[i * 16 + i] = _mm256_sqrt_pd(v);
        } else {
          l[i * 16 + j] = _mm256_div_pd(v, l[j * 16 + j]);
        }
      }
    }
    if (!pd) {
      scalar::nll_batch(prob, psi + s, lambda + s, 4, stride, out + s);
      continue;
    }
    double log_det_half[4] = {0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < p; ++i) {
      _mm256_store_pd(lanes, l[i * 16 + i]);
      for (int q = 0; q < 4; ++q) log_det_half[q] = log_det_half[q] + std::log(lanes[q]);
    }
    __m256d trace = _mm256_setzero_pd();
    for (int c = 0; c < p; ++c) {
      for (int i = c; i < p; ++i) {
        __m256d v = _mm256_set1_pd(prob.chol_s[i * p + c]);
        for (int m = c; m < i; ++m) v = _mm256_sub_pd(v, _mm256_mul_pd(l[i * 16 + m], y[m]));
        y[i] = _mm256_div_pd(v, l[i * 16 + i]);
        trace = _mm256_add_pd(trace, _mm256_mul_pd(y[i], y[i]));
      }
    }
    const __m256d base = _mm256_add_pd(_mm256_set1_pd(prob.log_2pi_half_p), _mm256_loadu_pd(log_det_half));
    _mm256_storeu_pd(out + s, _mm256_add_pd(base, _mm256_mul_pd(_mm256_set1_pd(0.5), trace)));
  }
  if (body < count) scalar::nll_batch(prob, psi + body, lambda + body, count - body, stride, out + body);
}

}  // namespace rlctfa::kernels::avx2
