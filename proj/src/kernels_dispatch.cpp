#include <atomic>

#include "rlctfa/kernels.hpp"

namespace rlctfa::kernels {

#ifndef RLCTFA_HAVE_AVX2
namespace avx2 {
bool compiled() { return false; }
void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out) {
  scalar::fiber_sos_batch(prob, lambda, count, stride, out);
}
void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out) {
  scalar::nll_batch(prob, psi, lambda, count, stride, out);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detect_isa() { return (avx2::compiled() && cpu_has_avx2()) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active().load(); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detect_isa() != Isa::Avx2) isa = Isa::Scalar;
  active().store(isa);
  return isa;
}

void fiber_sos_batch(const FiberProblem& prob, const double* lambda, std::size_t count,
                     std::size_t stride, double* out) {
  if (active_isa() == Isa::Avx2) {
    avx2::fiber_sos_batch(prob, lambda, count, stride, out);
  } else {
    scalar::fiber_sos_batch(prob, lambda, count, stride, out);
  }
}

void nll_batch(const NllProblem& prob, const double* psi, const double* lambda, std::size_t count,
               std::size_t stride, double* out) {
  if (active_isa() == Isa::Avx2) {
    avx2::nll_batch(prob, psi, lambda, count, stride, out);
  } else {
    scalar::nll_batch(prob, psi, lambda, count, stride, out);
  }
}

}  // namespace rlctfa::kernels
