#include "hdflow/simd.hpp"

namespace hdflow::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy2_scalar(double* acc, const double* x0, const double* x1, double a, double b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a * x0[i] + b * x1[i];
}

void scale_scalar(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

}  // namespace

const Kernels kScalar{Isa::Scalar, dot_scalar, axpy2_scalar, scale_scalar};

}  // namespace hdflow::simd::detail
