#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hdflow/entropy.hpp"
#include "hdflow/errors.hpp"

using namespace hdflow;
using namespace hdflow::entropy;
using frozen::Mat3;
using frozen::Vec3;

namespace {

const double kPi = std::numbers::pi;

FlowImage dilate(const VelocityProfile& g, double lambda) {
  // g_lambda(w) = lambda^{-3} g(w / lambda)
  return {g, Mat3::Identity() / lambda, std::pow(lambda, -3), "dilated"};
}

// Gaussian with covariance S and unit mass: entropy and C_G in closed form.
double gaussian_c_g(const Mat3& S) {
  const double s = 0.5 * std::log(std::pow(2 * kPi * std::numbers::e, 3) * S.determinant());
  return s - 1.5 * std::log(S.trace());
}

}  // namespace

TEST_CASE("unit Maxwellian") {
  const auto M = VelocityProfile::maxwellian(1, 1);
  CHECK(entropy_per_particle(M) == doctest::Approx(1.5 + 1.5 * std::log(kPi)).epsilon(1e-10));
  CHECK(c_g_maxwellian() == doctest::Approx(1.5 * (1 + std::log(kPi) - std::log(1.5))).epsilon(1e-15));
  CHECK(std::abs(c_g(M) - c_g_maxwellian()) < 1e-8);
}

TEST_CASE("plateau of height one carries almost no entropy") {
  // Smooth radial plateau g = 1 on |w| < 2 with a layer of width 0.2.
  auto edge = [](double x) {  // smooth step, 1 for x <= 0, 0 for x >= 1
    if (x <= 0) return 1.0;
    if (x >= 1) return 0.0;
    const double a = std::exp(-1 / (1 - x)), b = std::exp(-1 / x);
    return a / (a + b);
  };
  const frozen::Box box{{-2.2, -2.2, -2.2}, {2.2, 2.2, 2.2}};
  auto g = VelocityProfile::from_function([&](const Vec3& w) { return edge((w.norm() - 2.0) / 0.2); }, box,
                                          "plateau", true);
  quad::Tol tol{1e-6};
  tol.max_depth = 12;
  const double s = entropy_per_particle(g, tol);
  CHECK(std::abs(s) < 0.05);
  CHECK(s > 0);  // 0 < g <= 1 makes -g log g >= 0
}

TEST_CASE("dilation shifts entropy per particle by 3 log lambda") {
  Mat3 S;
  S << 0.8, 0.2, 0.0, 0.2, 0.5, 0.1, 0.0, 0.1, 0.6;
  const auto G = VelocityProfile::gaussian(S);
  const double s0 = entropy_per_particle(G);
  CHECK(s0 == doctest::Approx(0.5 * std::log(std::pow(2 * kPi * std::numbers::e, 3) * S.determinant())).epsilon(1e-9));
  CHECK(entropy_per_particle(dilate(G, 2.0)) == doctest::Approx(s0 + 3 * std::log(2.0)).epsilon(1e-9));
  for (double lambda : {0.5, 2.0}) CHECK(c_g(dilate(G, lambda)) == doctest::Approx(c_g(G)).epsilon(1e-9));
  CHECK(c_g(G) == doctest::Approx(gaussian_c_g(S)).epsilon(1e-9));
  // Amplitude drops out as well.
  const FlowImage scaled{G, Mat3::Identity(), 3.7, "amplitude"};
  CHECK(c_g(scaled) == doctest::Approx(c_g(G)).epsilon(1e-9));
}

TEST_CASE("ideal-gas form holds for every Maxwellian") {
  const double cases[3][2] = {{1.0, 1.0}, {2.5, 0.4}, {0.3, 3.0}};
  for (const auto& c : cases) {
    const auto g = frozen::identity(VelocityProfile::maxwellian(c[0], c[1]));
    CHECK(std::abs(ideal_form_residual(g, c[0])) < 1e-6);
  }
  // A drifting Maxwellian: the energy is measured about the mean.
  const auto drift = frozen::identity(VelocityProfile::maxwellian(1.7, 0.8, Vec3(0.5, -1.0, 0.25)));
  CHECK(std::abs(ideal_form_residual(drift, 1.7)) < 1e-6);
  auto r = report(drift);
  CHECK(r.eps == doctest::Approx(1.5 * 0.8).epsilon(1e-9));
  CHECK_THROWS_AS(ideal_form_residual(drift, 1.0), InvalidArgument);
}

TEST_CASE("frozen shear: entropy per particle stays put while energy grows") {
  Mat3 S;
  S << 0.6, 0.1, 0.0, 0.1, 0.5, 0.0, 0.0, 0.0, 0.4;
  const auto G0 = VelocityProfile::gaussian(S);
  const auto r1 = report(frozen::shear_free_flow(G0, 1.0, 1.0));
  double prev_eps = r1.eps;
  for (double t : {2.0, 5.0, 10.0}) {
    const auto r = report(frozen::shear_free_flow(G0, 1.0, t));
    CHECK(std::abs(r.s_per_particle - r1.s_per_particle) < 1e-6);
    CHECK(r.eps > prev_eps);
    prev_eps = r.eps;
    // With g's own constant the identity is bookkeeping.
    CHECK(std::abs(r.s_per_particle - std::log(std::pow(r.eps, 1.5) / r.rho) - r.C_G) < 1e-12);
    // Against the Maxwellian constant the shortfall grows like 3 log t.
    CHECK(r.residual < 0);
  }
  // eps(t) = tr S + K^2 (t-1)^2 S22 - 2 K (t-1) S12 per unit mass.
  const auto r10 = report(frozen::shear_free_flow(G0, 1.0, 10.0));
  CHECK(r10.eps == doctest::Approx(1.5 + 81 * 0.5 - 18 * 0.1).epsilon(1e-9));
}

TEST_CASE("cylindrical free flow: entropy per particle is constant") {
  const auto G0 = VelocityProfile::gaussian(Vec3(0.7, 0.5, 0.9).asDiagonal());
  const auto r0 = report(frozen::cylindrical_physical(G0, 1.0));
  for (double tau : {1.0, 2.0}) {
    const auto r = report(frozen::cylindrical_physical(G0, std::exp(tau)));
    CHECK(std::abs(r.s_per_particle - r0.s_per_particle) < 1e-6);
    CHECK(r.rho == doctest::Approx(r0.rho * std::exp(-2 * tau)).epsilon(1e-9));
    CHECK(r.eps < r0.eps);
  }
}

TEST_CASE("Maxwellian maximises entropy at fixed mass and energy") {
  // Same trace (energy) as the unit Maxwellian, 3/2.
  Mat3 A = Vec3(0.7, 0.5, 0.3).asDiagonal();
  Mat3 B;
  B << 0.5, 0.2, 0.0, 0.2, 0.5, 0.0, 0.0, 0.0, 0.5;
  Mat3 C = Vec3(0.55, 0.45, 0.5).asDiagonal();
  std::vector<FlowImage> cands{frozen::identity(VelocityProfile::gaussian(A)),
                               frozen::identity(VelocityProfile::gaussian(B)),
                               frozen::identity(VelocityProfile::gaussian(C)),
                               frozen::identity(VelocityProfile::bump(2.0))};
  auto rep = max_entropy_check(cands);
  CHECK(rep.maxwellian_wins);
  REQUIRE(rep.candidates_C_G.size() == 4);
  CHECK(rep.candidates_C_G[0] == doctest::Approx(gaussian_c_g(A)).epsilon(1e-9));
  for (double c : rep.candidates_C_G) CHECK(c < rep.maxwellian_C_G);
  // The nearly isotropic one is closest.
  CHECK(rep.candidates_C_G[2] > rep.candidates_C_G[0]);
  auto self = max_entropy_check({frozen::identity(VelocityProfile::maxwellian(2, 0.7))});
  CHECK(self.candidates_C_G[0] == doctest::Approx(self.maxwellian_C_G).epsilon(1e-9));
}

TEST_CASE("degenerate input is flagged") {
  const frozen::Box box{{-1, -1, -1}, {1, 1, 1}};
  auto zero = VelocityProfile::from_function([](const Vec3&) { return 0.0; }, box);
  CHECK_THROWS_AS(entropy_per_particle(zero), ToleranceError);
  CHECK_THROWS_AS(c_g(zero), ToleranceError);
}
