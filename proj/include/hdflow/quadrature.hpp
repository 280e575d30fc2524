#pragma once

// Thin wrappers over Boost.Math quadrature with our error policy: the
// requested tolerance is checked against Boost's own estimate and a miss is
// reported instead of silently returning a poor value.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "hdflow/errors.hpp"

namespace hdflow::quad {

struct Tol {
  double rel = 1e-10;
  double abs = 0.0;
  unsigned max_depth = 18;
  // A miss by more than this factor throws; inside nested integrals the
  // inner levels usually run with a larger slack than the outermost.
  double slack = 100.0;
  bool strict = true;
};

template <class T>
inline double magnitude(const T& v) {
  using std::abs;
  return abs(v);
}

namespace detail {

// One fixed GK61 panel. Boost 1.74 returns the error estimate of the
// rescaled [-1, 1] integral without the (b - a)/2 Jacobian (L1 does get it),
// so it is applied here.
template <class F>
auto gk61(F& f, double a, double b, double& e, double& l) {
  auto v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &e, &l);
  e *= 0.5 * std::abs(b - a);
  return v;
}

// Recursive bisection on Boost's fixed 61-point Kronrod rule, accepting a
// panel once its error estimate meets either the relative or the absolute
// target. Boost's own adaptive driver only has a relative criterion and
// refines to max depth on integrands that vanish up to round-off.
template <class F, class V>
void gk_panel(F& f, double a, double b, double rel, double abs_budget, unsigned depth, unsigned max_depth, V v,
              double e, double l, V& value, double& err, double& l1) {
  if (depth >= max_depth || e <= std::max(rel * l, abs_budget) || !(b - a > 1e-14 * (std::abs(a) + std::abs(b)))) {
    value += v;
    err += e;
    l1 += l;
    return;
  }
  const double m = 0.5 * (a + b);
  double e0 = 0, l0 = 0, e1 = 0, l1_ = 0;
  V v0 = gk61(f, a, m, e0, l0);
  V v1 = gk61(f, m, b, e1, l1_);
  // Estimates stuck at the round-off floor do not shrink under bisection.
  if (e0 + e1 >= e) {
    value += v0 + v1;
    err += e0 + e1;
    l1 += l0 + l1_;
    return;
  }
  gk_panel(f, a, m, rel, 0.5 * abs_budget, depth + 1, max_depth, v0, e0, l0, value, err, l1);
  gk_panel(f, m, b, rel, 0.5 * abs_budget, depth + 1, max_depth, v1, e1, l1_, value, err, l1);
}

}  // namespace detail

template <class F>
auto gk(F&& f, double a, double b, const Tol& tol = {}) {
  using V = decltype(f(a));
  V v{};
  double err = 0.0, l1 = 0.0, e0 = 0.0, l0 = 0.0;
  V v0 = detail::gk61(f, a, b, e0, l0);
  detail::gk_panel(f, a, b, tol.rel, tol.abs, 0, tol.max_depth, v0, e0, l0, v, err, l1);
  const bool ok = err <= tol.slack * std::max(tol.rel * l1, tol.abs) || l1 == 0.0;
  if (tol.strict && (!ok || !std::isfinite(magnitude(v)))) {
    std::ostringstream msg;
    msg << "adaptive Gauss-Kronrod missed tolerance on [" << a << ", " << b << "]: error estimate " << err << " vs L1 "
        << l1;
    throw ToleranceError(msg.str());
  }
  return v;
}

// Integral over [a, +inf); the integrand must decay.
template <class F>
auto to_infinity(F&& f, double a, const Tol& tol = {}) {
  boost::math::quadrature::exp_sinh<double> es;
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  auto v = es.integrate(f, a, std::numeric_limits<double>::infinity(), tol.rel, &err, &l1, &levels);
  if (tol.strict && !(err <= tol.slack * std::max(tol.rel * l1, tol.abs)))
    throw ToleranceError("exp-sinh tail quadrature missed tolerance: error " + std::to_string(err));
  return v;
}

// Endpoint-singular integrands on a finite interval.
template <class F>
auto ts(F&& f, double a, double b, const Tol& tol = {}) {
  boost::math::quadrature::tanh_sinh<double> q;
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  auto v = q.integrate(f, a, b, tol.rel, &err, &l1, &levels);
  if (tol.strict && !(err <= tol.slack * std::max(tol.rel * l1, tol.abs)))
    throw ToleranceError("tanh-sinh quadrature missed tolerance: error " + std::to_string(err));
  return v;
}

struct Box3 {
  double lo[3];
  double hi[3];
};

// Iterated adaptive Gauss-Kronrod over a box. Inner levels are not strict;
// the outer estimate is.
template <class F>
double box3(F&& f, const Box3& box, const Tol& tol = {}) {
  Tol inner = tol;
  inner.strict = false;
  inner.rel = tol.rel * 0.1;
  auto fx = [&](double x) {
    auto fy = [&](double y) {
      auto fz = [&](double z) { return f(x, y, z); };
      return gk(fz, box.lo[2], box.hi[2], inner);
    };
    return gk(fy, box.lo[1], box.hi[1], inner);
  };
  return gk(fx, box.lo[0], box.hi[0], tol);
}

}  // namespace hdflow::quad
