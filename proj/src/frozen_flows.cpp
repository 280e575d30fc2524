#include "hdflow/frozen_flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"

namespace hdflow::frozen {

VelocityProfile::VelocityProfile(std::function<double(const Vec3&)> fn, Box box, std::string description,
                                 bool axisymmetric)
    : fn_(std::move(fn)), box_(box), description_(std::move(description)), axisymmetric_(axisymmetric) {}

VelocityProfile VelocityProfile::gaussian(const Mat3& cov, const Vec3& mean, double mass) {
  if (!((cov - cov.transpose()).norm() <= 1e-14 * cov.norm())) throw InvalidArgument("covariance must be symmetric");
  Eigen::LLT<Mat3> llt(cov);
  if (llt.info() != Eigen::Success) throw InvalidArgument("covariance must be positive definite");
  if (!(mass > 0)) throw InvalidArgument("mass must be positive");
  const Mat3 inv = llt.solve(Mat3::Identity());
  const double norm = mass / (std::pow(2 * std::numbers::pi, 1.5) * std::sqrt(cov.determinant()));
  if (!std::isfinite(norm) || !(norm > 0)) throw InvalidArgument("gaussian normalization is not finite");
  Box box;
  // Mahalanobis radius 12: density below e^{-72} of the peak.
  for (int i = 0; i < 3; ++i) {
    box.lo[i] = mean[i] - 12 * std::sqrt(cov(i, i));
    box.hi[i] = mean[i] + 12 * std::sqrt(cov(i, i));
  }
  const bool axi = cov(0, 0) == cov(1, 1) && cov(0, 1) == 0 && cov(0, 2) == 0 && cov(1, 2) == 0 && mean[0] == 0 &&
                   mean[1] == 0;
  return VelocityProfile(
      [inv, mean, norm](const Vec3& w) {
        const Vec3 d = w - mean;
        return norm * std::exp(-0.5 * d.dot(inv * d));
      },
      box, "gaussian", axi);
}

VelocityProfile VelocityProfile::maxwellian(double rho, double theta, const Vec3& u) {
  if (!(rho > 0) || !(theta > 0)) throw InvalidArgument("Maxwellian needs rho > 0 and theta > 0");
  auto p = gaussian(0.5 * theta * Mat3::Identity(), u, rho);
  p.description_ = "maxwellian";
  return p;
}

VelocityProfile VelocityProfile::bump(double radius, double mass, const Vec3& center) {
  if (!(radius > 0) || !(mass > 0)) throw InvalidArgument("bump needs positive radius and mass");
  auto shape = [](double x) { return x < 1 ? std::exp(-1.0 / (1.0 - x)) : 0.0; };  // x = |u|^2
  const double I = quad::gk([&](double x) { return x * x * shape(x * x); }, 0.0, 1.0, {1e-13});
  const double norm = mass / (4 * std::numbers::pi * radius * radius * radius * I);
  if (!std::isfinite(norm) || !(norm > 0)) throw InvalidArgument("bump normalization is not finite");
  Box box;
  for (int i = 0; i < 3; ++i) {
    box.lo[i] = center[i] - radius;
    box.hi[i] = center[i] + radius;
  }
  const double r2 = radius * radius;
  return VelocityProfile([=](const Vec3& w) { return norm * shape((w - center).squaredNorm() / r2); }, box, "bump",
                         center[0] == 0 && center[1] == 0);
}

VelocityProfile VelocityProfile::tabulated(const Box& box, std::array<int, 3> n, std::vector<double> values) {
  for (int i = 0; i < 3; ++i) {
    if (n[i] < 2) throw InvalidArgument("tabulated profile needs at least 2 points per axis");
    if (!(box.hi[i] > box.lo[i])) throw InvalidArgument("tabulated profile box is empty");
  }
  if (values.size() != static_cast<std::size_t>(n[0]) * n[1] * n[2])
    throw InvalidArgument("tabulated profile: value count does not match the grid");
  for (double v : values)
    if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument("tabulated profile values must be finite and >= 0");
  auto data = std::make_shared<std::vector<double>>(std::move(values));
  return VelocityProfile(
      [box, n, data](const Vec3& w) {
        int idx[3];
        double fr[3];
        for (int i = 0; i < 3; ++i) {
          if (w[i] < box.lo[i] || w[i] > box.hi[i]) return 0.0;
          const double x = (w[i] - box.lo[i]) / (box.hi[i] - box.lo[i]) * (n[i] - 1);
          idx[i] = std::min(static_cast<int>(x), n[i] - 2);
          fr[i] = x - idx[i];
        }
        auto at = [&](int i, int j, int k) { return (*data)[(static_cast<std::size_t>(i) * n[1] + j) * n[2] + k]; };
        double v = 0;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk)
              v += (di ? fr[0] : 1 - fr[0]) * (dj ? fr[1] : 1 - fr[1]) * (dk ? fr[2] : 1 - fr[2]) *
                   at(idx[0] + di, idx[1] + dj, idx[2] + dk);
        return v;
      },
      box, "tabulated", false);
}

VelocityProfile VelocityProfile::from_csv(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto w1 = t.col("w1"), w2 = t.col("w2"), w3 = t.col("w3"), G = t.col("G");
  std::array<std::vector<double>, 3> axes{w1, w2, w3};
  Box box;
  std::array<int, 3> n{};
  for (int i = 0; i < 3; ++i) {
    auto& a = axes[i];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    if (a.size() < 2) throw InvalidArgument("tabulated profile needs at least 2 points per axis");
    n[i] = static_cast<int>(a.size());
    box.lo[i] = a.front();
    box.hi[i] = a.back();
    const double h = (a.back() - a.front()) / (n[i] - 1);
    for (int k = 0; k < n[i]; ++k)
      if (std::abs(a[k] - (a.front() + k * h)) > 1e-9 * (std::abs(a.back()) + std::abs(a.front()) + h))
        throw InvalidArgument("tabulated profile grid must be uniform");
  }
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  if (G.size() != total) throw InvalidArgument("tabulated profile must cover the full grid exactly once");
  std::vector<double> values(total, 0.0);
  std::vector<char> seen(total, 0);
  for (std::size_t r = 0; r < G.size(); ++r) {
    std::size_t flat = 0;
    const double w[3] = {w1[r], w2[r], w3[r]};
    for (int i = 0; i < 3; ++i) {
      const double h = (box.hi[i] - box.lo[i]) / (n[i] - 1);
      flat = flat * n[i] + static_cast<std::size_t>(std::lround((w[i] - box.lo[i]) / h));
    }
    if (seen[flat]) throw InvalidArgument("tabulated profile has a repeated grid point");
    seen[flat] = 1;
    values[flat] = G[r];
  }
  auto p = tabulated(box, n, std::move(values));
  p.description_ = "tabulated:" + path.string();
  return p;
}

VelocityProfile VelocityProfile::from_function(std::function<double(const Vec3&)> fn, const Box& box,
                                               std::string description, bool axisymmetric) {
  for (int i = 0; i < 3; ++i)
    if (!(box.hi[i] > box.lo[i])) throw InvalidArgument("profile box is empty");
  return VelocityProfile(std::move(fn), box, std::move(description), axisymmetric);
}

Box FlowImage::support() const {
  const Box s = G0.support();
  const Mat3 Minv = M.inverse();
  Box b;
  b.lo.fill(1e300);
  b.hi.fill(-1e300);
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 x((corner & 1) ? s.hi[0] : s.lo[0], (corner & 2) ? s.hi[1] : s.lo[1], (corner & 4) ? s.hi[2] : s.lo[2]);
    const Vec3 w = Minv * x;
    for (int i = 0; i < 3; ++i) {
      b.lo[i] = std::min(b.lo[i], w[i]);
      b.hi[i] = std::max(b.hi[i], w[i]);
    }
  }
  return b;
}

FlowImage identity(const VelocityProfile& G0) { return {G0, Mat3::Identity(), 1.0, "identity"}; }

FlowImage homogeneous_free_flow(const VelocityProfile& G0, double tau) {
  if (!(tau >= 0)) throw InvalidArgument("tau must be >= 0");
  return {G0, std::exp(tau) * Mat3::Identity(), std::exp(3 * tau), "homogeneous"};
}

FlowImage cylindrical_free_flow(const VelocityProfile& G0, double tau) {
  if (!(tau >= 0)) throw InvalidArgument("tau must be >= 0");
  const double e = std::exp(tau);
  return {G0, Vec3(e, e, 1).asDiagonal(), e * e, "cylindrical"};
}

FlowImage cylindrical_physical(const VelocityProfile& G0, double t) {
  if (!(t >= 1)) throw InvalidArgument("t must be >= 1");
  return {G0, Vec3(t, t, 1).asDiagonal(), 1.0, "cylindrical-physical"};
}

FlowImage shear_free_flow(const VelocityProfile& G0, double K, double t) {
  if (!(t >= 1)) throw InvalidArgument("shear free flow needs t >= 1");
  Mat3 M = Mat3::Identity();
  M(0, 1) = K * (t - 1);
  return {G0, M, 1.0, "shear"};
}

FlowImage shear_free_flow_scaled(const VelocityProfile& G0, double K, double tau) {
  if (!(tau >= 0)) throw InvalidArgument("tau must be >= 0");
  const double e = std::exp(tau);
  Mat3 M = Mat3::Identity();
  M(0, 0) = e;
  M(0, 1) = K * (e - 1);
  return {G0, M, e, "shear-scaled"};
}

double mass(const FlowImage& g, const quad::Tol& tol) {
  return integrate(g, [](const Vec3&, double v) { return v; }, tol);
}

Mat3 second_moments(const FlowImage& g, const quad::Tol& tol) {
  Mat3 S;
  for (int i = 0; i < 3; ++i) S(i, i) = integrate(g, [i](const Vec3& w, double v) { return w[i] * w[i] * v; }, tol);
  // Cross moments can vanish; measure them against the diagonal.
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      quad::Tol t = tol;
      t.abs = std::max(tol.abs, 1e-12 * std::sqrt(S(i, i) * S(j, j)));
      S(i, j) = integrate(g, [i, j](const Vec3& w, double v) { return w[i] * w[j] * v; }, t);
      S(j, i) = S(i, j);
    }
  return S;
}

Vec3 mean_velocity(const FlowImage& g, const quad::Tol& tol) {
  const double m = mass(g, tol);
  Vec3 u;
  quad::Tol t = tol;
  // Odd moments of symmetric profiles vanish; an absolute floor keeps the
  // relative target from chasing zero.
  t.abs = std::max(tol.abs, 1e-14 * m);
  for (int i = 0; i < 3; ++i) u[i] = integrate(g, [i](const Vec3& w, double v) { return w[i] * v; }, t) / m;
  return u;
}

double time_change(double tau, double gamma) {
  if (!(gamma > -2)) throw InvalidArgument("time change needs gamma > -2");
  if (!(tau >= 0)) throw InvalidArgument("tau must be >= 0");
  const double k = 2 + gamma;
  return -std::expm1(-k * tau) / k;
}

double inverse_time_change(double s, double gamma) {
  if (!(gamma > -2)) throw InvalidArgument("time change needs gamma > -2");
  const double k = 2 + gamma;
  if (!(s >= 0 && s * k < 1)) throw InvalidArgument("s must lie in [0, 1/(2+gamma))");
  return -std::log1p(-k * s) / k;
}

double predicted_decay_slope(double gamma) {
  if (!(gamma > -2)) throw InvalidArgument("decay exponent needs gamma > -2");
  return gamma >= -1 ? -1.0 : -(2 + gamma);
}

double collision_rate(const VelocityProfile& G0, double gamma, double tau, double rel) {
  if (!(gamma > -2)) throw InvalidArgument("collision rate needs gamma > -2");
  if (!(tau >= 0)) throw InvalidArgument("tau must be >= 0");
  const Box& s = G0.support();
  double rmax = 0;
  for (double x : {s.lo[0], s.hi[0]})
    for (double y : {s.lo[1], s.hi[1]}) rmax = std::max(rmax, std::hypot(x, y));
  const double shrink = std::exp(-tau);
  quad::Tol inner{rel * 0.1};
  inner.strict = false;

  // In u = e^tau (w1, w2) polar coordinates and w3 = a sinh v, a = e^{-tau} r,
  // the kernel (a^2 + w3^2)^{gamma/2} dw3 becomes (a cosh v)^{gamma+1} dv.
  auto radial = [&](double cth, double sth) {
    auto fr = [&](double r) {
      const double a = shrink * r;
      if (!(a > 0)) return 0.0;
      const double v0 = std::asinh(s.lo[2] / a), v1 = std::asinh(s.hi[2] / a);
      auto fv = [&](double v) {
        const double w3 = a * std::sinh(v);
        const double g = G0(Vec3(r * cth, r * sth, w3));
        return g == 0 ? 0.0 : std::pow(a * std::cosh(v), gamma + 1) * g;
      };
      return r * quad::gk(fv, v0, v1, inner);
    };
    quad::Tol rt{rel * 0.3};
    return quad::ts(fr, 0.0, rmax, rt);
  };

  double angular;
  if (G0.axisymmetric()) {
    angular = 2 * std::numbers::pi * radial(1.0, 0.0);
  } else {
    // Periodic trapezoid in theta, doubled until two levels agree.
    auto level = [&](int m) {
      double sum = 0;
      for (int k = 0; k < m; ++k) {
        const double th = 2 * std::numbers::pi * k / m;
        sum += radial(std::cos(th), std::sin(th));
      }
      return 2 * std::numbers::pi * sum / m;
    };
    int m = 16;
    double prev = level(m);
    for (;;) {
      m *= 2;
      angular = level(m);
      if (std::abs(angular - prev) <= rel * std::abs(angular)) break;
      if (m >= 512) throw ToleranceError("collision rate: angular quadrature did not converge");
      prev = angular;
    }
  }
  return shrink * angular;
}

DecayReport collision_rate_decay(const VelocityProfile& G0, double gamma, const std::vector<double>& tau_grid,
                                 double rel) {
  if (tau_grid.size() < 5) throw InvalidArgument("decay fit needs at least 5 grid points");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1])) throw InvalidArgument("tau grid must be increasing");
  DecayReport rep;
  rep.gamma = gamma;
  rep.predicted_slope = predicted_decay_slope(gamma);
  rep.logarithmic = gamma == -1;
  rep.tau = tau_grid;
  for (double t : tau_grid) rep.rate.push_back(collision_rate(G0, gamma, t, rel));
  rep.fit_from = tau_grid.size() / 5;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(tau_grid.size() - rep.fit_from);
  for (std::size_t i = rep.fit_from; i < tau_grid.size(); ++i) {
    const double x = tau_grid[i], y = std::log(rep.rate[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

double shear_energy_ratio(const VelocityProfile& G0, double K, double t, const quad::Tol& tol) {
  if (K == 0) throw InvalidArgument("energy ratio needs K != 0");
  const auto g = shear_free_flow(G0, K, t);
  const double eps = second_moments(g, tol).trace() / mass(g, tol);
  return eps / (K * K * t * t);
}

double shear_energy_limit(const VelocityProfile& G0, const quad::Tol& tol) {
  const auto g = identity(G0);
  return integrate(g, [](const Vec3& w, double v) { return w[1] * w[1] * v; }, tol) / mass(g, tol);
}

TestFunction TestFunction::bump(const Vec3& center, double radius, const Vec3& weights) {
  if (!(radius > 0) || !(weights.minCoeff() > 0)) throw InvalidArgument("test bump needs positive radii");
  TestFunction f;
  f.semi_axes = radius * weights;
  f.center = center;
  const Vec3 axes = f.semi_axes;
  f.phi = [=](const Vec3& x) {
    const double q = ((x - center).array() / axes.array()).square().sum();
    return q < 1 ? std::exp(1 - 1 / (1 - q)) : 0.0;
  };
  f.sup_norm = 1.0;
  f.label = "bump";
  return f;
}

namespace {

constexpr double kHuge = 1e300;

// (x_i - c_i)^2 / a_i^2, zero along infinite axes.
double axis_term(double x, double c, double a) { return std::isinf(a) ? 0.0 : (x - c) * (x - c) / (a * a); }

std::pair<double, double> axis_range(double c, double a, double room) {
  if (room <= 0) return {0.0, 0.0};
  if (std::isinf(a)) return {-kHuge, kHuge};
  const double h = a * std::sqrt(room);
  return {c - h, c + h};
}

// Support of phi in the pairing integral.
struct EllipsoidClip {
  Vec3 c, a;
  std::pair<double, double> w3() const { return axis_range(c[2], a[2], 1.0); }
  std::pair<double, double> w2(double w3) const { return axis_range(c[1], a[1], 1 - axis_term(w3, c[2], a[2])); }
  std::pair<double, double> w1(double w2, double w3) const {
    return axis_range(c[0], a[0], 1 - axis_term(w3, c[2], a[2]) - axis_term(w2, c[1], a[1]));
  }
};

// Support of xi -> phi(-K xi2, xi2, xi3) in the limit pairing.
struct LimitClip {
  Vec3 c, a;
  double K;
  std::pair<double, double> w3() const { return axis_range(c[2], a[2], 1.0); }
  std::pair<double, double> w2(double w3) const {
    const double room = 1 - axis_term(w3, c[2], a[2]);
    if (room <= 0) return {0.0, 0.0};
    // ((-K x - c1)/a1)^2 + ((x - c2)/a2)^2 <= room
    const double i1 = std::isinf(a[0]) ? 0.0 : 1 / (a[0] * a[0]);
    const double i2 = std::isinf(a[1]) ? 0.0 : 1 / (a[1] * a[1]);
    const double A = K * K * i1 + i2;
    const double B = 2 * K * c[0] * i1 - 2 * c[1] * i2;
    const double C = c[0] * c[0] * i1 + c[1] * c[1] * i2 - room;
    if (A == 0) return B == 0 ? std::pair{-kHuge, kHuge} : std::pair{0.0, 0.0};
    const double disc = B * B - 4 * A * C;
    if (disc <= 0) return {0.0, 0.0};
    const double r = std::sqrt(disc);
    return {(-B - r) / (2 * A), (-B + r) / (2 * A)};
  }
  std::pair<double, double> w1(double, double) const { return {-kHuge, kHuge}; }
};

}  // namespace

std::vector<WeakLimitRow> weak_limit_check(const VelocityProfile& G0, double K, const std::vector<double>& taus,
                                           const std::vector<TestFunction>& tests, const quad::Tol& tol) {
  std::vector<WeakLimitRow> out;
  const auto base = identity(G0);
  quad::Tol t = tol;
  t.abs = std::max(t.abs, 1e-13);
  for (const auto& tf : tests) {
    const double limit = integrate(
        base, [&](const Vec3& w, double v) { return v * tf.phi(Vec3(-K * w[1], w[1], w[2])); }, t,
        LimitClip{tf.center, tf.semi_axes, K});
    for (double tau : taus) {
      const auto G = shear_free_flow_scaled(G0, K, tau);
      const double pairing = integrate(
          G, [&](const Vec3& w, double v) { return v * tf.phi(w); }, t, EllipsoidClip{tf.center, tf.semi_axes});
      const double gap = std::abs(pairing - limit);
      out.push_back({tau, tf.label, pairing, limit, gap, gap / tf.sup_norm});
    }
  }
  return out;
}

}  // namespace hdflow::frozen
