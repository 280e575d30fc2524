#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "doctest.h"
#include "hdflow/dispersion.hpp"
#include "hdflow/errors.hpp"

using namespace hdflow;
using namespace hdflow::dispersion;

namespace {

bool close(cplx a, cplx b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

// E1 by its convergent series; fine for the moderate z used here.
double e1_series(double z) {
  double sum = 0, term = 1;
  for (int n = 1; n < 200; ++n) {
    term *= -z / n;
    sum += term / n;
  }
  return -0.57721566490153286061 - std::log(z) - sum;
}

double z0_beta2(double eps) { return 0.5 * (eps + std::sqrt(eps * eps + 4 * eps)); }

}  // namespace

TEST_CASE("Laplace symbol against closed forms") {
  for (cplx z : {cplx(0.01, 0), cplx(0.3, 0.2), cplx(2.0, -1.0), cplx(50, 5)})
    CHECK(close(lambda_transform(z, 0.0, 1.0), 1.0 / z, 1e-12));
  for (double z : {0.05, 0.5, 1.0, 3.0}) {
    CHECK(lambda_transform(z, 0, 0.0).real() == doctest::Approx(std::exp(z) * e1_series(z)).epsilon(1e-12));
    CHECK(lambda_transform(z, 0, 0.0).real() == doctest::Approx(std::exp(z) * boost::math::expint(1, z)).epsilon(1e-12));
  }
  // e^z z^{-beta} Gamma(beta, z) for real arguments.
  for (double beta : {0.5, 2.0, 3.5})
    for (double z : {1e-3, 0.1, 2.0})
      CHECK(lambda_transform(z, 0, beta).real() ==
            doctest::Approx(std::exp(z) * std::pow(z, -beta) * boost::math::tgamma(beta, z)).epsilon(1e-12));
  // Complex oracles, 30-digit values of e^z z^{-s} Gamma(s, z) with s = beta - ik.
  CHECK(close(lambda_transform({0.3, 0.1}, 0.5, 2.0), {1.931820029499270784, -10.486432694649195812}, 1e-12));
  CHECK(close(lambda_transform({0.05, -0.02}, 0.1, 0.5), {6.1257317109433013448, 0.20751748425528090029}, 1e-12));
  CHECK(close(lambda_transform({2.0, 0.0}, 1.5, 1.5), {0.45307628432290137699, -0.30486644570599070183}, 1e-12));
  CHECK(close(lambda_transform({0.01, 0.001}, 0.05, 3.0), {1661920.8683310120517, -1075014.9484369029153}, 1e-12));
  // Watson: z Lambda(z, 0) -> 1.
  double prev = 1e9;
  for (double z : {10.0, 100.0, 1e3, 1e4}) {
    double g = std::abs(z * lambda_transform(z, 0, 2.5).real() - 1);
    CHECK(g < prev);
    prev = g;
  }
  CHECK(prev < 2e-4);
  CHECK_THROWS_AS(lambda_transform({0.0, 1.0}, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(lambda_transform({-1.0, 0.0}, 0, 1), InvalidArgument);
}

TEST_CASE("Lambda(z,0) is positive and decreasing on the real axis") {
  for (double beta : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    double prev = INFINITY;
    for (double z = 1e-3; z < 50; z *= 1.5) {
      auto L = lambda_transform(z, 0, beta);
      CHECK(L.imag() == 0.0);
      CHECK(L.real() > 0);
      CHECK(L.real() < prev);
      prev = L.real();
    }
  }
}

TEST_CASE("real roots") {
  for (double eps : {1e-4, 1e-2, 0.5, 3.0}) {
    auto r = solve_root(eps, 0, 1.0);
    CHECK(r.z0.real() == doctest::Approx(eps).epsilon(1e-13));
    CHECK(r.z0.imag() == 0.0);
    CHECK(r.residual < 1e-10);
    CHECK(solve_root(eps, 0, 2.0).z0.real() == doctest::Approx(z0_beta2(eps)).epsilon(1e-12));
  }
  // Ratio to the small-eps law approaches 1 monotonically; for beta = 2 the
  // closed form z^2 = eps (z + 1) puts it above 1.
  double prev = INFINITY;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    double ratio = solve_root(eps, 0, 2.0).z0.real() / std::sqrt(eps);
    CHECK(std::abs(ratio - 1) < prev);
    prev = std::abs(ratio - 1);
  }
  // beta = 0: exponentially small root, still found.
  auto r0 = solve_root(0.05, 0, 0.0);
  CHECK(r0.z0.real() > 0);
  CHECK(r0.z0.real() < 1e-8);
  CHECK(r0.residual < 1e-10);
  CHECK_THROWS_AS(solve_root(0.0, 0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(solve_root(0.1, 0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(solve_root(1e-300, 0, 2.0), InvalidArgument);
  CHECK(solve_root(0.01, 0, 0.0).z0.real() < 1e-40);
  CHECK_THROWS_AS(solve_root(0.002, 0, 0.0), InvalidArgument);
}

TEST_CASE("z0(0) increases in eps and in beta") {
  const std::vector<double> eps = {1e-4, 1e-3, 1e-2, 1e-1};
  const std::vector<double> betas = {0.25, 0.5, 1.0, 2.0, 3.0};
  std::vector<std::vector<double>> z(eps.size(), std::vector<double>(betas.size()));
  for (std::size_t i = 0; i < eps.size(); ++i)
    for (std::size_t j = 0; j < betas.size(); ++j) z[i][j] = solve_root(eps[i], 0, betas[j]).z0.real();
  for (std::size_t i = 0; i < eps.size(); ++i)
    for (std::size_t j = 0; j < betas.size(); ++j) {
      if (i) CHECK(z[i][j] > z[i - 1][j]);
      if (j) CHECK(z[i][j] > z[i][j - 1]);
    }
}

TEST_CASE("complex roots") {
  auto r = solve_root(1e-3, 0.1, 2.0);
  CHECK(close(r.z0, {0.031765754774604480778, -0.0063017501164407397236}, 1e-10));
  CHECK(close(solve_root(0.05, 0.5, 2.0).z0, {0.23726560376878927518, -0.13098061933119159621}, 1e-10));
  const double z00 = solve_root(1e-3, 0, 2.0).z0.real();
  for (double k : {0.05, 0.1, 0.5}) {
    auto p = solve_root(1e-3, k, 2.0), m = solve_root(1e-3, -k, 2.0);
    CHECK(p.z0.real() < z00);
    CHECK(p.residual < 1e-10);
    CHECK(close(m.z0, std::conj(p.z0), 1e-10));
  }
}

TEST_CASE("front coefficients") {
  // Implicit differentiation oracle: z' = -i P/B, z'' from second derivatives of Lambda.
  for (auto [eps, beta] : {std::pair{0.05, 2.0}, {1e-2, 0.5}, {1e-3, 1.0}}) {
    auto c = front_coefficients(eps, beta);
    const double z = c.z0;
    auto w = [&](auto g) { return laplace_weighted(z, 0, beta, g).real(); };
    const double B = w([](double t) { return t; });
    const double P = w([](double t) { return std::log1p(t); });
    const double R = w([](double t) { return std::log1p(t) * std::log1p(t); });
    const double U = w([](double t) { return t * std::log1p(t); });
    const double V = w([](double t) { return t * t; });
    CHECK(c.B_eps == doctest::Approx(B).epsilon(1e-12));
    CHECK(c.A1 == doctest::Approx(-P / B).epsilon(1e-7));
    CHECK(c.A2 == doctest::Approx((R - 2 * U * P / B + V * P * P / (B * B)) / (2 * B)).epsilon(1e-5));
  }
  auto c = front_coefficients(0.05, 2.0);
  CHECK(c.A1 == doctest::Approx(-0.260098382759043710700912094856).epsilon(1e-8));
  CHECK(c.A2 == doctest::Approx(0.0512480373859809921148888862555).epsilon(1e-6));
  CHECK(c.B_eps == doctest::Approx(144.0).epsilon(1e-11));
  for (double beta : {0.5, 1.0, 2.0})
    for (double eps : {1e-2, 1e-3}) CHECK(front_coefficients(eps, beta).A2 > 0);
  auto b1 = front_coefficients(0.02, 1.0);
  CHECK(b1.B_eps == doctest::Approx(1 / (b1.z0 * b1.z0)).epsilon(1e-11));
  // B z0^{1+beta} / Gamma(beta+1) -> 1 as eps -> 0.
  double prev = INFINITY;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    auto r = solve_root(eps, 0, 2.0);
    double B = laplace_weighted(r.z0, 0, 2.0, [](double t) { return t; }).real();
    double g = std::abs(B * std::pow(r.z0.real(), 3) / 2 - 1);
    CHECK(g < prev);
    prev = g;
  }
  CHECK(prev < 0.02);
  CHECK_THROWS_AS(front_coefficients(0.1, 0.0), InvalidArgument);
}

TEST_CASE("moment growth prediction against the Volterra solver") {
  auto p = toy::InitialProfile::gaussian(0.2, 0.4);
  const double eps = 0.05;
  for (double beta : {1.0, 2.0}) {
    auto g = predicted_moment_growth(eps, beta, p);
    auto s = toy::solve_lambda_volterra(beta, [eps](double) { return eps; }, p, 400, 8000);
    CHECK(std::abs(toy::log_slope(s, 200, 400) / g.rate - 1) < 0.02);
    double amp = std::exp(s.log_lambda.back() - g.rate * s.times.back());
    CHECK(std::abs(amp / g.amplitude - 1) < 0.01);
  }
  auto g1 = predicted_moment_growth(1e-3, 1.0, 2.5);
  CHECK(g1.rate == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(g1.amplitude == doctest::Approx(1e-3 * 2.5).epsilon(1e-10));
  CHECK(g1.amplitude_asymptotic == doctest::Approx(1e-3 * 2.5).epsilon(1e-12));
  auto a = predicted_moment_growth(1e-2, 2.0, 1.0), b = predicted_moment_growth(1e-2, 2.0, 3.0);
  CHECK(b.amplitude == doctest::Approx(3 * a.amplitude).epsilon(1e-14));
  CHECK(b.amplitude_asymptotic == doctest::Approx(3 * a.amplitude_asymptotic).epsilon(1e-14));
}

TEST_CASE("front profile") {
  auto c = front_coefficients(0.05, 2.0);
  SUBCASE("synthetic field from the asymptotic formula") {
    toy::ToyField F;
    const double t = 100, beta = 2.0;
    for (int j = 0; j <= 2000; ++j) F.X.push_back(-10 + 0.03 * j);
    F.t = {0, 50, 100};
    F.log_scale = {0, 0, 0};
    F.unit.assign(3, std::vector<double>(F.X.size(), 0.0));
    const double w = std::sqrt(c.A2 * t);
    for (std::size_t j = 0; j < F.X.size(); ++j)
      F.unit[2][j] = front_Q((F.X[j] + c.A1 * t) / w) * std::exp(-beta * F.X[j] - 20);
    auto r = front_profile_check(F, c, beta, t);
    CHECK(r.sup_distance < 1e-6);
    CHECK(r.argmax_X == doctest::Approx(-c.A1 * t).epsilon(1e-3));
    CHECK_THROWS_AS(front_profile_check(F, c, beta, 0.0), InvalidArgument);
    CHECK_THROWS_AS(front_profile_check(F, c, beta, 50.0), InvalidArgument);
  }
  SUBCASE("solved field approaches the Gaussian front") {
    auto p = toy::InitialProfile::gaussian(0, 0.3).with_mass(1.0);
    auto F = toy::solve_field(p, [](double) { return 0.05; }, {-4, 90, 471}, {0, 200, 801});
    auto r = front_profile_check(F, c, 2.0, 200);
    CHECK(r.sup_distance < 0.1);
    CHECK(std::abs(front_drift(F, 2.0, 100, 200) / -c.A1 - 1) < 0.1);
  }
}
