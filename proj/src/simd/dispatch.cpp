#include <cstdlib>
#include <string_view>

#include "hdflow/errors.hpp"
#include "hdflow/simd.hpp"

namespace hdflow::simd {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(HDFLOW_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(HDFLOW_HAVE_NEON_TU)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_available(isa)) throw InvalidArgument(std::string("SIMD variant not available here: ") + isa_name(isa));
  switch (isa) {
#if defined(HDFLOW_HAVE_AVX2_TU)
    case Isa::Avx2: return detail::kAvx2;
#endif
#if defined(HDFLOW_HAVE_NEON_TU)
    case Isa::Neon: return detail::kNeon;
#endif
    default: return detail::kScalar;
  }
}

namespace {

Isa pick() {
  if (const char* env = std::getenv("HDFLOW_SIMD")) {
    std::string_view v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
    if (v == "neon" && isa_available(Isa::Neon)) return Isa::Neon;
  }
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = pick();
  return isa;
}

const Kernels& kernels() {
  static const Kernels& k = kernels_for(active_isa());
  return k;
}

}  // namespace hdflow::simd
