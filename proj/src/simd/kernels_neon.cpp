// aarch64 only; Advanced SIMD is part of the base ISA there.
#include <arm_neon.h>

#include "hdflow/simd.hpp"

namespace hdflow::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
    s1 = vfmaq_f64(s1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy2_neon(double* acc, const double* x0, const double* x1, double a, double b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t r = vld1q_f64(acc + i);
    r = vfmaq_n_f64(r, vld1q_f64(x0 + i), a);
    r = vfmaq_n_f64(r, vld1q_f64(x1 + i), b);
    vst1q_f64(acc + i, r);
  }
  for (; i < n; ++i) acc[i] += a * x0[i] + b * x1[i];
}

void scale_neon(double* x, double s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), s));
  for (; i < n; ++i) x[i] *= s;
}

}  // namespace

const Kernels kNeon{Isa::Neon, dot_neon, axpy2_neon, scale_neon};

}  // namespace hdflow::simd::detail
