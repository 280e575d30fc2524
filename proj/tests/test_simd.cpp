#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hdflow/simd.hpp"

using namespace hdflow::simd;

namespace {

std::vector<Isa> variants() {
  std::vector<Isa> v;
  for (Isa i : {Isa::Avx2, Isa::Neon})
    if (isa_available(i)) v.push_back(i);
  return v;
}

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_CASE("dispatcher picks an available variant") {
  CHECK(isa_available(Isa::Scalar));
  CHECK(isa_available(active_isa()));
  CHECK(kernels().isa == active_isa());
}

TEST_CASE("dot: SIMD variants agree with the scalar reference") {
  const Kernels& ref = kernels_for(Isa::Scalar);
  std::mt19937_64 g(7);
  for (Isa isa : variants()) {
    const Kernels& k = kernels_for(isa);
    for (std::size_t n : {0, 1, 3, 4, 5, 15, 16, 17, 31, 64, 1000, 4099}) {
      auto a = random_vec(g, n), b = random_vec(g, n);
      double s_abs = 0.0;
      for (std::size_t i = 0; i < n; ++i) s_abs += std::abs(a[i] * b[i]);
      double x = ref.dot(a.data(), b.data(), n), y = k.dot(a.data(), b.data(), n);
      CHECK(std::abs(x - y) <= 4e-16 * s_abs * std::log2(n + 2.0) + 1e-300);
    }
  }
}

TEST_CASE("axpy2 and scale: SIMD variants agree with the scalar reference") {
  const Kernels& ref = kernels_for(Isa::Scalar);
  std::mt19937_64 g(11);
  for (Isa isa : variants()) {
    const Kernels& k = kernels_for(isa);
    for (std::size_t n : {1, 2, 5, 8, 13, 257}) {
      // Overlapping sources, as used by the field solver (x1 = x0 - 1).
      auto src = random_vec(g, n + 1);
      auto acc0 = random_vec(g, n);
      auto acc1 = acc0;
      ref.axpy2(acc0.data(), src.data() + 1, src.data(), 0.3, -1.7, n);
      k.axpy2(acc1.data(), src.data() + 1, src.data(), 0.3, -1.7, n);
      for (std::size_t i = 0; i < n; ++i) CHECK(acc1[i] == doctest::Approx(acc0[i]).epsilon(1e-14));
      auto s0 = random_vec(g, n), s1 = s0;
      ref.scale(s0.data(), 3.25, n);
      k.scale(s1.data(), 3.25, n);
      CHECK(s0 == s1);  // a single rounding either way
    }
  }
}

TEST_CASE("dot of reversed history against contiguous weights") {
  // The Volterra solver stores weights reversed so both operands are
  // contiguous; check that the trick reproduces the convolution sum.
  std::vector<double> w = {1, 2, 3, 4, 5}, lam = {10, 20, 30, 40, 50};
  std::vector<double> wr(w.rbegin(), w.rend());
  double conv = 0;
  for (int m = 0; m < 5; ++m) conv += w[m] * lam[4 - m];
  CHECK(dot(wr, lam) == doctest::Approx(conv));
}
