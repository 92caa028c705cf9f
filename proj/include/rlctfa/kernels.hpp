#pragma once

// Batched inner loops of the Monte-Carlo oracles. Every kernel has a
// scalar reference and, on x86-64, an AVX2 variant working on four samples
// per register. Variants use the same operation order and no fused
// multiply-add, so their outputs are bit-identical to the reference.
//
// Batches are structure-of-arrays: entry e of sample s lives at
// data[e * stride + s].

#include <cstddef>
#include <span>
#include <vector>

namespace rlctfa::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

/// Best variant compiled in and supported by the running CPU.
Isa detect_isa();
/// Variant used by the dispatching entry points. Defaults to detect_isa().
Isa active_isa();
/// Overrides dispatch (tests, benchmarking). Requesting an unavailable
/// variant falls back to Scalar. Returns the variant actually selected.
Isa set_active_isa(Isa isa);

/// Reduced fiber ideal of a p x k loading matrix: the targets sigma_ij for
/// i < j in row-major pair order.
struct FiberProblem {
  int p = 0;
  int k = 0;
  std::vector<double> offdiag;  // size p(p-1)/2
};

/// Gaussian per-observation negative log-likelihood of Sigma = diag(psi) +
/// Lambda Lambda^T against a fixed sample covariance S = C C^T.
struct NllProblem {
  int p = 0;
  int k = 0;
  std::vector<double> chol_s;  // lower Cholesky factor of S, row-major p x p
  double log_2pi_half_p = 0.0;
};

NllProblem make_nll_problem(int p, int k, std::span<const double> s_row_major);

// lambda: p*k entries (i * k + a); out: one value per sample.
namespace scalar {
void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out);
void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out);
}  // namespace scalar

namespace avx2 {
bool compiled();
void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out);
void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out);
}  // namespace avx2

/// Dispatching entry points.
void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out);
void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out);

}  // namespace rlctfa::kernels
