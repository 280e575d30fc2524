#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hdflow/quadrature.hpp"

namespace hdflow::frozen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Box {
  std::array<double, 3> lo{}, hi{};
};

// Velocity density G0(w) on R^3 with a bounding box outside which it is zero
// or negligible (below ~1e-30 of its peak).
class VelocityProfile {
 public:
  // mass * N(mean, cov).
  static VelocityProfile gaussian(const Mat3& cov, const Vec3& mean = Vec3::Zero(), double mass = 1.0);
  // rho (pi theta)^{-3/2} exp(-|w - u|^2 / theta): particle mass 2, so theta = 1
  // gives the unit Maxwellian.
  static VelocityProfile maxwellian(double rho, double theta, const Vec3& u = Vec3::Zero());
  // Radial bump exp(-1/(1 - |w - c|^2/R^2)) scaled to the given mass.
  static VelocityProfile bump(double radius, double mass = 1.0, const Vec3& center = Vec3::Zero());
  // Trilinear interpolation on a regular grid, zero outside. values[i][j][k]
  // flattened with k fastest.
  static VelocityProfile tabulated(const Box& box, std::array<int, 3> n, std::vector<double> values);
  // CSV with columns w1,w2,w3,G covering a full regular grid in any order.
  static VelocityProfile from_csv(const std::filesystem::path& path);
  // Arbitrary nonnegative density, zero outside box.
  static VelocityProfile from_function(std::function<double(const Vec3&)> fn, const Box& box,
                                       std::string description = "custom", bool axisymmetric = false);

  double operator()(const Vec3& w) const { return fn_(w); }
  const Box& support() const { return box_; }
  const std::string& description() const { return description_; }
  // Symmetric about the w3 axis: the rate quadrature then skips the angle.
  bool axisymmetric() const { return axisymmetric_; }

 private:
  VelocityProfile(std::function<double(const Vec3&)> fn, Box box, std::string description, bool axisymmetric);
  std::function<double(const Vec3&)> fn_;
  Box box_;
  std::string description_;
  bool axisymmetric_ = false;
};

// g(w) = c * G0(M w): every free flow here is of this form.
struct FlowImage {
  VelocityProfile G0;
  Mat3 M = Mat3::Identity();
  double c = 1.0;
  std::string label;
  double operator()(const Vec3& w) const { return c * G0(M * w); }
  // Bounding box of the preimage of G0's support.
  Box support() const;
};

enum class Regime { HomogeneousDilatation, CylindricalDilatation, SimpleShear };

FlowImage identity(const VelocityProfile& G0);
// G(tau, w) = e^{3 tau} G0(e^tau w).
FlowImage homogeneous_free_flow(const VelocityProfile& G0, double tau);
// G(tau, w) = e^{2 tau} G0(e^tau w1, e^tau w2, w3).
FlowImage cylindrical_free_flow(const VelocityProfile& G0, double tau);
// Physical density g(t, w) = G0(t w1, t w2, w3) = t^{-2} G(log t, w).
FlowImage cylindrical_physical(const VelocityProfile& G0, double t);
// g(t, w) = G0(w1 + K w2 (t - 1), w2, w3), t >= 1.
FlowImage shear_free_flow(const VelocityProfile& G0, double K, double t);
// G(tau, xi) = e^tau G0(xi1 e^tau + K xi2 (e^tau - 1), xi2, xi3).
FlowImage shear_free_flow_scaled(const VelocityProfile& G0, double K, double tau);

// Optional restriction of the integration domain, e.g. to a test function's
// support. Each level returns an interval; the default is unbounded.
struct NoClip {
  std::pair<double, double> w3() const { return {-1e300, 1e300}; }
  std::pair<double, double> w2(double) const { return {-1e300, 1e300}; }
  std::pair<double, double> w1(double, double) const { return {-1e300, 1e300}; }
};

// Iterated integral of f(w, g(w)) over the support of g: outer w3, then w2,
// then w1 restricted to where the line meets G0's support box. The inner
// interval follows sheared or squeezed supports, so concentration along w1
// is resolved without a global grid.
template <class F, class Clip = NoClip>
double integrate(const FlowImage& g, F&& f, const quad::Tol& tol = {}, const Clip& clip = {}) {
  const Box b = g.support();
  const Box s = g.G0.support();
  quad::Tol inner = tol;
  inner.strict = false;
  inner.rel = tol.rel * 0.1;
  const Vec3 a = g.M.col(0);
  auto f3 = [&](double w3) {
    auto f2 = [&](double w2) {
      const Vec3 base = g.M.col(1) * w2 + g.M.col(2) * w3;
      auto [t0, t1] = clip.w1(w2, w3);
      for (int j = 0; j < 3; ++j) {
        if (a[j] == 0) {
          if (base[j] < s.lo[j] || base[j] > s.hi[j]) return 0.0;
          continue;
        }
        double u = (s.lo[j] - base[j]) / a[j], v = (s.hi[j] - base[j]) / a[j];
        if (u > v) std::swap(u, v);
        t0 = std::max(t0, u);
        t1 = std::min(t1, v);
      }
      if (!(t1 > t0)) return 0.0;
      auto f1 = [&](double w1) {
        const Vec3 w(w1, w2, w3);
        return f(w, g(w));
      };
      return quad::gk(f1, t0, t1, inner);
    };
    const auto [c0, c1] = clip.w2(w3);
    const double lo = std::max(b.lo[1], c0), hi = std::min(b.hi[1], c1);
    return hi > lo ? quad::gk(f2, lo, hi, inner) : 0.0;
  };
  const auto [c0, c1] = clip.w3();
  const double lo = std::max(b.lo[2], c0), hi = std::min(b.hi[2], c1);
  return hi > lo ? quad::gk(f3, lo, hi, tol) : 0.0;
}

double mass(const FlowImage& g, const quad::Tol& tol = {});
// int w w^T g dw.
Mat3 second_moments(const FlowImage& g, const quad::Tol& tol = {});
Vec3 mean_velocity(const FlowImage& g, const quad::Tol& tol = {});

// s = (1 - e^{-(2+gamma) tau}) / (2 + gamma); gamma > -2.
double time_change(double tau, double gamma);
double inverse_time_change(double s, double gamma);

struct DecayReport {
  double gamma = 0;
  std::vector<double> tau;
  std::vector<double> rate;  // R(tau)
  double fitted_slope = 0;
  double predicted_slope = 0;
  bool logarithmic = false;  // |gamma| = 1: the bound is tau e^{-tau}
  std::size_t fit_from = 0;  // first grid index used by the fit
};

// R(tau) = e^{-tau} int |w|^gamma G(tau, w) dw for the cylindrical free flow.
double collision_rate(const VelocityProfile& G0, double gamma, double tau, double rel = 1e-9);
double predicted_decay_slope(double gamma);
// Fits log R against tau on the grid, dropping the first 20% as transient.
DecayReport collision_rate_decay(const VelocityProfile& G0, double gamma, const std::vector<double>& tau_grid,
                                 double rel = 1e-9);

// eps(t) / (K^2 t^2) for the simple-shear free flow, with eps the second
// moment per unit mass; tends to int G0 w2^2 / int G0.
double shear_energy_ratio(const VelocityProfile& G0, double K, double t, const quad::Tol& tol = {});
double shear_energy_limit(const VelocityProfile& G0, const quad::Tol& tol = {});

struct TestFunction {
  std::function<double(const Vec3&)> phi;
  double sup_norm = 1.0;
  std::string label;
  // phi vanishes outside this axis-aligned ellipsoid; infinite semi-axes
  // mean no restriction along that axis.
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Constant(std::numeric_limits<double>::infinity());
  // Smooth bump exp(1 - 1/(1 - q)), q = sum ((x_i - c_i) / (r weights_i))^2,
  // sup 1. An infinite weight makes phi independent of that coordinate.
  static TestFunction bump(const Vec3& center, double radius, const Vec3& weights = Vec3::Ones());
};

struct WeakLimitRow {
  double tau;
  std::string label;
  double pairing;
  double limit;
  double gap;       // |pairing - limit|
  double rel_gap;   // gap / sup|phi|
};

// Pairs the scaled shear solution with each test function and compares with
// int [int G0 deta] phi(-K xi2, xi2, xi3) dxi2 dxi3.
std::vector<WeakLimitRow> weak_limit_check(const VelocityProfile& G0, double K, const std::vector<double>& taus,
                                           const std::vector<TestFunction>& tests, const quad::Tol& tol = {});

}  // namespace hdflow::frozen
