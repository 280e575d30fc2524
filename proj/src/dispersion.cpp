#include "hdflow/dispersion.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hdflow/errors.hpp"
#include "hdflow/quadrature.hpp"

namespace hdflow::dispersion {

namespace {

constexpr double kRootTol = 1e-10;
constexpr double kEulerGamma = 0.57721566490153286061;

constexpr double kMinRoot = 1e-100;

double seed_root(double eps, double beta) {
  if (beta > 0) return std::pow(boost::math::tgamma(beta) * eps, 1 / beta);
  // beta = 0: Lambda ~ -log z - gamma for small z
  return eps < 1 ? std::exp(-1 / eps - kEulerGamma) : eps;
}

}  // namespace

cplx laplace_weighted(cplx z, double k, double beta, const std::function<double(double)>& g) {
  if (!(z.real() > 0)) throw InvalidArgument("Laplace symbol needs Re z > 0");
  if (!std::isfinite(k) || !std::isfinite(beta)) throw InvalidArgument("Laplace symbol: non-finite k or beta");
  const cplx s(beta, -k);
  // Head in u = log(1+t): t = e^u - 1 and (1+t)^{s-1} dt = e^{s u} du.
  const double t1 = 1 / std::abs(z);
  const double u1 = std::log1p(t1);
  auto head = [&](double u) {
    const double t = std::expm1(u);
    return std::exp(-z * t + s * u) * g(t);
  };
  quad::Tol tol{.rel = 1e-13, .abs = 0.0, .max_depth = 30};
  cplx v = quad::gk(head, 0.0, u1, tol);
  // Tail t = t1 + r / Re z.
  const double a = z.real();
  const cplx zn = z / a;
  const cplx pre = std::exp(-z * t1);
  auto tail = [&](double r) {
    const double t = t1 + r / a;
    return pre * std::exp(-zn * r + (s - 1.0) * std::log1p(t)) * g(t) / a;
  };
  v += quad::to_infinity(tail, 0.0, {.rel = 1e-13});
  return v;
}

cplx lambda_transform(cplx z, double k, double beta) {
  return laplace_weighted(z, k, beta, [](double) { return 1.0; });
}

namespace {

double B_of(cplx z, double k, double beta) { return laplace_weighted(z, k, beta, [](double t) { return t; }).real(); }

double solve_real(double eps, double beta) {
  auto phi = [&](double y) { return std::log(eps * lambda_transform(std::exp(y), 0.0, beta).real()); };
  double y = std::log(seed_root(eps, beta));
  double f = phi(y);
  // Bracket: phi is decreasing in y.
  double lo = y, hi = y, flo = f, fhi = f;
  for (int i = 0; i < 400 && flo < 0; ++i) lo -= 1, flo = phi(lo);
  for (int i = 0; i < 400 && fhi > 0; ++i) hi += 1, fhi = phi(hi);
  if (flo < 0 || fhi > 0) throw ToleranceError("dispersion root: could not bracket the real root");
  if (f == 0) return std::exp(y);
  for (int it = 0; it < 200; ++it) {
    const double z = std::exp(y);
    const double L = lambda_transform(z, 0.0, beta).real();
    f = std::log(eps * L);
    if (f > 0)
      lo = y;
    else
      hi = y;
    if (std::abs(f) < 1e-15 || hi - lo < 1e-15 * std::max(1.0, std::abs(y))) return z;
    const double df = -z * B_of(z, 0.0, beta) / L;
    double ny = y - f / df;
    if (!(ny > lo && ny < hi)) ny = 0.5 * (lo + hi);
    if (std::abs(ny - y) < 1e-16 * std::max(1.0, std::abs(y))) return std::exp(ny);
    y = ny;
  }
  return std::exp(y);
}

// Newton at fixed k from z; returns false on failure.
bool newton_complex(double eps, double k, double beta, cplx& z) {
  for (int it = 0; it < 60; ++it) {
    const cplx F = eps * lambda_transform(z, k, beta) - 1.0;
    if (std::abs(F) < 1e-14) return true;
    const cplx dF = -eps * laplace_weighted(z, k, beta, [](double t) { return t; });
    cplx step = F / dF;
    // Stay in Re z > 0.
    while (!((z - step).real() > 0.05 * z.real())) step *= 0.5;
    z -= step;
    if (std::abs(step) < 1e-15 * std::abs(z)) return std::abs(eps * lambda_transform(z, k, beta) - 1.0) < kRootTol;
  }
  return false;
}

}  // namespace

DispersionRoot solve_root(double epsilon, double k, double beta) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
  if (beta < 0 || !std::isfinite(beta)) throw InvalidArgument("beta must be >= 0");
  if (!std::isfinite(k)) throw InvalidArgument("k must be finite");
  // Roots near 1e-150 and below stall the solve (squares go subnormal).
  if (!(seed_root(epsilon, beta) >= kMinRoot))
    throw InvalidArgument("epsilon too small: the root would fall below 1e-100");
  DispersionRoot r{k, beta, epsilon, {solve_real(epsilon, beta), 0.0}, 0.0};
  if (k != 0.0) {
    // Continuation in k from the real root with a linear predictor.
    cplx z = r.z0, zprev = z;
    double kc = 0.0, dk = std::copysign(std::min(0.05, std::abs(k)), k), kprev = 0.0;
    int halvings = 0;
    while (kc != k) {
      double kn = (std::abs(k - kc) <= std::abs(dk)) ? k : kc + dk;
      cplx guess = kc == kprev ? z : z + (z - zprev) * ((kn - kc) / (kc - kprev));
      if (!(guess.real() > 0)) guess = z;
      if (newton_complex(epsilon, kn, beta, guess)) {
        zprev = z, kprev = kc;
        z = guess, kc = kn;
      } else {
        if (++halvings > 30) {
          std::ostringstream m;
          m << "dispersion root: continuation stalled at k = " << kc;
          throw ToleranceError(m.str());
        }
        dk *= 0.5;
      }
    }
    r.z0 = z;
  }
  r.residual = std::abs(1.0 - epsilon * lambda_transform(r.z0, k, beta));
  if (!(r.residual < kRootTol)) {
    std::ostringstream m;
    m << "dispersion root residual " << r.residual << " above " << kRootTol;
    throw ToleranceError(m.str());
  }
  return r;
}

FrontCoefficients front_coefficients(double epsilon, double beta) {
  if (!(beta > 0)) throw InvalidArgument("front coefficients need beta > 0");
  FrontCoefficients c;
  c.epsilon = epsilon;
  c.beta = beta;
  const cplx z0 = solve_root(epsilon, 0.0, beta).z0;
  c.z0 = z0.real();
  auto d1 = [&](double h) {
    return (solve_root(epsilon, h, beta).z0 - solve_root(epsilon, -h, beta).z0) / (2 * h);
  };
  auto d2 = [&](double h) {
    return (solve_root(epsilon, h, beta).z0 - 2.0 * z0 + solve_root(epsilon, -h, beta).z0) / (h * h);
  };
  const double h = 1e-3;
  const cplx D1 = (4.0 * d1(h / 2) - d1(h)) / 3.0;
  const cplx D2 = (4.0 * d2(h / 2) - d2(h)) / 3.0;
  c.A1 = D1.imag();
  c.A2 = -0.5 * D2.real();
  if (!std::isfinite(c.A1) || !std::isfinite(c.A2)) throw ToleranceError("front coefficients: differentiation failed");
  c.B_eps = B_of(z0, 0.0, beta);
  return c;
}

MomentGrowth predicted_moment_growth(double epsilon, double beta, const toy::InitialProfile& profile) {
  return predicted_moment_growth(epsilon, beta, profile.moment(beta));
}

MomentGrowth predicted_moment_growth(double epsilon, double beta, double C_beta) {
  if (!(beta > 0)) throw InvalidArgument("moment growth prediction needs beta > 0");
  MomentGrowth g;
  g.rate = solve_root(epsilon, 0.0, beta).z0.real();
  g.amplitude = C_beta / (epsilon * B_of(g.rate, 0.0, beta));
  g.rate_asymptotic = seed_root(epsilon, beta);
  g.amplitude_asymptotic = g.rate_asymptotic / beta * C_beta;
  return g;
}

namespace {

// Phi(t_i, X) e^{beta X} up to a constant factor, and the interpolated argmax.
std::vector<double> slice(const toy::ToyField& F, std::size_t i, double beta, double& argmax) {
  const auto& u = F.unit[i];
  std::vector<double> s(u.size());
  const double xr = F.X.back();
  for (std::size_t j = 0; j < u.size(); ++j) s[j] = u[j] * std::exp(beta * (F.X[j] - xr));
  auto it = std::max_element(s.begin(), s.end());
  if (*it <= 0) throw InvalidArgument("front check: degenerate (all-zero) slice");
  const double peak = *it;
  for (double& v : s) v /= peak;
  std::size_t j = static_cast<std::size_t>(it - s.begin());
  argmax = F.X[j];
  if (j > 0 && j + 1 < s.size()) {
    // vertex of the parabola through the three samples
    const double a = s[j - 1], b = s[j], c = s[j + 1];
    const double den = a - 2 * b + c;
    if (den < 0) argmax += 0.5 * (a - c) / den * F.dX();
  }
  return s;
}

std::size_t grid_index(const toy::ToyField& F, double t) {
  const double h = F.dt();
  const long n = std::lround(t / h);
  if (n < 0 || n >= static_cast<long>(F.t.size()) || std::abs(n * h - t) > 1e-9 * std::max(1.0, t))
    throw InvalidArgument("front check: t is not on the field grid");
  return static_cast<std::size_t>(n);
}

}  // namespace

FrontReport front_profile_check(const toy::ToyField& field, const FrontCoefficients& c, double beta, double t) {
  if (!(t > 0)) throw InvalidArgument("front check needs t > 0");
  if (!(c.A2 > 0)) throw InvalidArgument("front check needs A2 > 0");
  const std::size_t i = grid_index(field, t);
  FrontReport r;
  r.t = t;
  auto s = slice(field, i, beta, r.argmax_X);
  r.width = std::sqrt(c.A2 * t);
  r.predicted_center = -c.A1 * t;
  // Unit integral in xi: int s dxi = int s dX / width.
  double area = 0;
  for (std::size_t j = 0; j < s.size(); ++j) area += (j == 0 || j + 1 == s.size() ? 0.5 : 1.0) * s[j];
  area *= field.dX() / r.width;
  const double qnorm = std::sqrt(2 * std::numbers::pi);  // int Q dxi
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double xi = (field.X[j] + c.A1 * t) / r.width;
    r.sup_distance = std::max(r.sup_distance, std::abs(s[j] / area - front_Q(xi) / qnorm));
  }
  return r;
}

double front_drift(const toy::ToyField& field, double beta, double t0, double t1) {
  std::vector<double> ts, xs;
  for (std::size_t i = 0; i < field.t.size(); ++i) {
    if (field.t[i] < t0 || field.t[i] > t1 || !std::isfinite(field.log_scale[i])) continue;
    double am;
    slice(field, i, beta, am);
    ts.push_back(field.t[i]);
    xs.push_back(am);
  }
  if (ts.size() < 2) throw InvalidArgument("front drift: fewer than two grid times in the window");
  double mt = 0, mx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) mt += ts[i], mx += xs[i];
  mt /= ts.size(), mx /= ts.size();
  double stt = 0, stx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) stt += (ts[i] - mt) * (ts[i] - mt), stx += (ts[i] - mt) * (xs[i] - mx);
  return stx / stt;
}

}  // namespace hdflow::dispersion
