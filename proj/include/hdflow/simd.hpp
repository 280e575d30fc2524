#pragma once

#include <cstddef>
#include <span>

namespace hdflow::simd {

enum class Isa { Scalar, Avx2, Neon };

// Function table for the handful of inner loops that dominate run time:
// the Volterra history dot product, the shifted two-tap update of the field
// solver, and in-place rescaling. Every entry has a scalar reference.
struct Kernels {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // acc[i] += a * x0[i] + b * x1[i]
  void (*axpy2)(double* acc, const double* x0, const double* x1, double a, double b, std::size_t n);
  void (*scale)(double* x, double s, std::size_t n);
};

bool isa_available(Isa isa);
const char* isa_name(Isa isa);

// Best available ISA, unless HDFLOW_SIMD=scalar|avx2|neon pins one.
Isa active_isa();
const Kernels& kernels();
// Throws InvalidArgument if the ISA is not usable on this machine.
const Kernels& kernels_for(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

namespace detail {
extern const Kernels kScalar;
#if defined(HDFLOW_HAVE_AVX2_TU)
extern const Kernels kAvx2;
#endif
#if defined(HDFLOW_HAVE_NEON_TU)
extern const Kernels kNeon;
#endif
}  // namespace detail

}  // namespace hdflow::simd
