#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "hdflow/errors.hpp"
#include "hdflow/quadrature.hpp"
#include "hdflow/simd.hpp"
#include "hdflow/toy_model.hpp"

namespace hdflow::toy {

namespace {

constexpr double kRescaleAbove = 1e200;
using Gauss = boost::math::quadrature::gauss<double, 15>;

void check_grid(double T, int N) {
  if (!(T > 0) || !std::isfinite(T)) throw InvalidArgument("T must be positive and finite");
  if (N < 2) throw InvalidArgument("need at least N = 2 steps");
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) throw ResolutionError("slope fit needs at least two points in the window");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  return sxy / sxx;
}

}  // namespace

ProductWeights::ProductWeights(double p, double h, int N) : N_(N), h_(h), I0_(N), I1_(N), W_(N + 1, 0.0), rev_(N + 1, 0.0) {
  for (int m = 0; m < N; ++m) {
    const double a = m * h, b = (m + 1) * h;
    I0_[m] = Gauss::integrate([p](double x) { return std::pow(1 + x, p); }, a, b);
    I1_[m] = Gauss::integrate([p, a, h](double x) { return std::pow(1 + x, p) * (x - a) / h; }, a, b);
  }
  // Interval m carries y(t - xi_m) with weight I0 - I1 and y(t - xi_{m+1}) with I1.
  for (int m = 1; m < N; ++m) W_[m] = I0_[m] - I1_[m] + I1_[m - 1];
  for (int m = 1; m < N; ++m) rev_[N - m] = W_[m];
}

ToyMomentSeries solve_lambda_volterra(double beta, const RateFn& epsilon, const InitialProfile& profile, double T,
                                      int N) {
  if (beta < 0) throw InvalidArgument("negative beta is not supported");
  return solve_lambda_volterra(beta, epsilon, profile.moment(beta), T, N);
}

ToyMomentSeries solve_lambda_volterra(double beta, const RateFn& epsilon, double C_beta, double T, int N) {
  if (beta < 0) throw InvalidArgument("negative beta is not supported");
  check_grid(T, N);
  const double h = T / N;
  ProductWeights w(beta - 1, h, N);
  const auto& K = simd::kernels();

  ToyMomentSeries s;
  s.beta = beta;
  s.times.resize(N + 1);
  s.epsilon.resize(N + 1);
  s.log_lambda.resize(N + 1);
  s.lambda.resize(N + 1);
  // lambda_i = u_i * exp(S); u is rescaled in place when it grows too large.
  std::vector<double> u(N + 1, 0.0);
  double S = 0.0;
  for (int n = 0; n <= N; ++n) {
    const double t = n * h;
    const double e = epsilon(t);
    if (!std::isfinite(e) || e < 0) throw InvalidArgument("epsilon must be finite and non-negative");
    s.times[n] = t;
    s.epsilon[n] = e;
    double rhs = C_beta * std::pow(1 + t, beta - 1) * std::exp(-S);
    if (n > 0) {
      rhs += w.last(n) * u[0];
      if (n > 1) rhs += K.dot(u.data() + 1, w.rev().data() + (N - n + 1), n - 1);
    }
    // At t = 0 the history integral is empty, so there is no implicit part.
    const double denom = n == 0 ? 1.0 : 1 - e * w.first();
    if (!(denom > 0)) throw ToleranceError("time step too large for the implicit Volterra step (eps*h ~ 2)");
    u[n] = e * rhs / denom;
    if (u[n] > kRescaleAbove) {
      const double f = u[n];
      K.scale(u.data(), 1.0 / f, n + 1);
      S += std::log(f);
    }
    s.log_lambda[n] = u[n] > 0 ? std::log(u[n]) + S : -std::numeric_limits<double>::infinity();
  }
  for (int n = 0; n <= N; ++n) s.lambda[n] = std::exp(s.log_lambda[n]);
  return s;
}

double log_slope(const ToyMomentSeries& s, double t0, double t1) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.times.size(); ++i)
    if (s.times[i] >= t0 && s.times[i] <= t1 && std::isfinite(s.log_lambda[i]))
      x.push_back(s.times[i]), y.push_back(s.log_lambda[i]);
  return slope(x, y);
}

double loglog_slope(const ToyMomentSeries& s, double t0, double t1) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.times.size(); ++i)
    if (s.times[i] >= t0 && s.times[i] <= t1 && std::isfinite(s.log_lambda[i]))
      x.push_back(std::log1p(s.times[i])), y.push_back(s.log_lambda[i]);
  return slope(x, y);
}

double ToyField::phi(std::size_t i, std::size_t j) const {
  return unit[i][j] == 0.0 ? 0.0 : unit[i][j] * std::exp(log_scale[i]);
}

double ToyField::lambda(double beta, std::size_t i) const {
  if (!std::isfinite(log_scale[i])) return 0.0;
  const auto& u = unit[i];
  const std::size_t n = u.size();
  double acc = 0;
  for (std::size_t j = 0; j < n; ++j) acc += (j == 0 || j + 1 == n ? 0.5 : 1.0) * u[j] * std::exp(beta * X[j]);
  return acc * dX() * std::exp(log_scale[i]);
}

ToyField solve_field(const InitialProfile& profile, const RateFn& epsilon, const UniformGrid& Xg, const UniformGrid& tg,
                     const FieldOptions& opt) {
  if (Xg.n < 3 || !(Xg.hi > Xg.lo)) throw InvalidArgument("X grid needs >= 3 points and hi > lo");
  if (tg.lo != 0.0) throw InvalidArgument("t grid must start at 0");
  check_grid(tg.hi, tg.n - 1);
  const int N = tg.n - 1, nX = Xg.n;
  const double h = tg.hi / N, dX = (Xg.hi - Xg.lo) / (nX - 1);
  if (dX > std::log1p(h) * (1 + 1e-12))
    throw ResolutionError("X spacing exceeds the smallest shift log(1+dt); refine X or coarsen t");

  ToyField F;
  F.X.resize(nX);
  F.t.resize(N + 1);
  for (int j = 0; j < nX; ++j) F.X[j] = Xg.lo + j * dX;
  for (int n = 0; n <= N; ++n) F.t[n] = n * h;
  F.log_scale.assign(N + 1, -std::numeric_limits<double>::infinity());
  F.unit.assign(N + 1, std::vector<double>(nX, 0.0));

  ProductWeights w(-1.0, h, N);
  const auto& K = simd::kernels();
  std::vector<int> q(N + 1);
  std::vector<double> frac(N + 1);
  for (int m = 0; m <= N; ++m) {
    double s = std::log1p(m * h) / dX;
    q[m] = static_cast<int>(std::floor(s));
    frac[m] = s - q[m];
  }
  // Right-edge coverage: a solution touching the last cells has lost mass.
  const int edge = std::max(2, nX / 50);

  std::vector<double> acc(nX);
  for (int n = 0; n <= N; ++n) {
    const double t = F.t[n], e = epsilon(t);
    if (!std::isfinite(e) || e < 0) throw InvalidArgument("epsilon must be finite and non-negative");
    double ref = -std::numeric_limits<double>::infinity();
    for (int m = 1; m <= n; ++m) ref = std::max(ref, F.log_scale[n - m]);
    if (!std::isfinite(ref)) ref = 0.0;
    const double shift0 = std::log1p(t);
    const double src = std::exp(-ref) / (1 + t);
    for (int j = 0; j < nX; ++j) acc[j] = src * profile(F.X[j] - shift0);
    for (int m = 1; m <= n; ++m) {
      const int r = n - m;
      if (!std::isfinite(F.log_scale[r])) continue;
      const double wm = (m == n ? w.last(n) : w.interior(m)) * std::exp(F.log_scale[r] - ref);
      if (wm == 0.0) continue;
      const double a = wm * (1 - frac[m]), b = wm * frac[m];
      const int qm = q[m];
      const double* u = F.unit[r].data();
      // acc[j] += a u[j - qm] + b u[j - qm - 1], dropping indices below 0.
      if (qm < nX) acc[qm] += a * u[0];
      if (qm + 1 < nX) K.axpy2(acc.data() + qm + 1, u + 1, u, a, b, static_cast<std::size_t>(nX - qm - 1));
    }
    const double denom = n == 0 ? 1.0 : 1 - e * w.first();
    if (!(denom > 0)) throw ToleranceError("time step too large for the implicit field step");
    double peak = 0;
    for (int j = 0; j < nX; ++j) {
      acc[j] *= e / denom;
      peak = std::max(peak, acc[j]);
    }
    if (peak > 0) {
      for (int j = 0; j < nX; ++j) F.unit[n][j] = acc[j] / peak;
      F.log_scale[n] = ref + std::log(peak);
      double wmax = 0, wedge = 0;
      for (int j = 0; j < nX; ++j) {
        const double v = F.unit[n][j] * std::exp(opt.coverage_beta * (F.X[j] - Xg.hi));
        wmax = std::max(wmax, v);
        if (j >= nX - edge) wedge = std::max(wedge, v);
      }
      if (wedge > opt.coverage_tol * wmax)
        throw ResolutionError("field reaches the right end of the X grid at t = " + std::to_string(t) +
                                "; extend the X range");
    }
  }
  return F;
}

double integrated_rate(const RateFn& epsilon, double t) {
  if (t <= 0) return 0.0;
  return quad::gk(epsilon, 0.0, t, {.rel = 1e-13, .abs = 1e-15, .max_depth = 30});
}

double reconstruct_total_moment(const ToyField& field, const InitialProfile& profile, const RateFn& epsilon,
                                double beta, double t) {
  const double h = field.dt();
  const int n = static_cast<int>(std::lround(t / h));
  if (n < 0 || n >= static_cast<int>(field.t.size()) || std::abs(n * h - t) > 1e-9 * std::max(1.0, t))
    throw InvalidArgument("reconstruct_total_moment: t is not on the field grid");
  // Inner Z integral after e^Z = 1 + xi: int_0^t (1+xi)^{beta-1} lambda_beta(t-xi) dxi.
  double hist = 0;
  if (n > 0) {
    ProductWeights w(beta - 1, h, n);
    hist = w.first() * field.lambda(beta, n) + w.last(n) * field.lambda(beta, 0);
    for (int m = 1; m < n; ++m) hist += w.interior(m) * field.lambda(beta, n - m);
  }
  const double direct = std::pow(1 + t, beta - 1) * profile.moment(beta);
  return std::exp(-integrated_rate(epsilon, t)) * (direct + hist);
}

SelfConsistentResult solve_selfconsistent(double a, const InitialProfile& profile, double T, int N) {
  if (!(a > 0 && a < 1)) throw InvalidArgument("a must lie in (0, 1)");
  return solve_selfconsistent(a, profile.moment(1 - a), T, N);
}

SelfConsistentResult solve_selfconsistent(double a, double C, double T, int N) {
  if (!(a > 0 && a < 1)) throw InvalidArgument("a must lie in (0, 1)");
  if (!(C > 0)) throw InvalidArgument("C must be positive");
  check_grid(T, N);
  const double h = T / N;
  ProductWeights w(-a, h, N);
  const auto& K = simd::kernels();

  SelfConsistentResult r;
  r.a = a;
  auto& s = r.lambda;
  s.beta = 1 - a;
  s.times.resize(N + 1);
  s.lambda.resize(N + 1);
  s.log_lambda.resize(N + 1);
  s.epsilon.resize(N + 1);
  r.log_E.resize(N + 1);
  r.t_eps.resize(N + 1);

  // Y(t) = d/dt E with E = exp(int eps); eps = Y/E and lambda = eps Y.
  // Y_n = C (1+t)^{-a} + history + first*lambda_n, E_n by the trapezoid rule.
  double E = 1.0, Yprev = 0.0;
  for (int n = 0; n <= N; ++n) {
    const double t = n * h;
    double base = C * std::pow(1 + t, -a);
    if (n > 0) {
      base += w.last(n) * s.lambda[0];
      if (n > 1) base += K.dot(s.lambda.data() + 1, w.rev().data() + (N - n + 1), n - 1);
    }
    double Y = base, En = E;
    if (n > 0) {
      // Fixed point in Y; contraction factor ~ first * 2Y/E, small for sane h.
      bool ok = false;
      for (int it = 0; it < 200; ++it) {
        En = E + 0.5 * h * (Yprev + Y);
        double Ynew = base + w.first() * Y * Y / En;
        if (std::abs(Ynew - Y) <= 1e-15 * std::abs(Ynew)) {
          Y = Ynew;
          ok = true;
          break;
        }
        Y = Ynew;
      }
      if (!ok) throw ToleranceError("self-consistent step did not converge; reduce the time step");
      En = E + 0.5 * h * (Yprev + Y);
    }
    const double eps = Y / En;
    s.times[n] = t;
    s.epsilon[n] = eps;
    s.lambda[n] = eps * Y;
    s.log_lambda[n] = std::log(s.lambda[n]);
    r.log_E[n] = std::log(En);
    r.t_eps[n] = t * eps;
    E = En;
    Yprev = Y;
  }
  return r;
}

AdiabaticReport adiabatic_check(double beta, double A, double T, int N, const InitialProfile& profile) {
  if (beta == 1.0) throw InvalidArgument("beta = 1 is the marginal case; no adiabatic formula");
  if (beta < 0) throw InvalidArgument("negative beta is not supported");
  if (A < 0) throw InvalidArgument("A must be non-negative");
  AdiabaticReport r;
  r.beta = beta;
  r.A = A;
  r.T = T;
  r.series = solve_lambda_volterra(beta, [A](double t) { return A / (1 + t); }, profile, T, N);
  if (A == 0) {
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const auto& s = r.series;
  if (beta > 1) {
    r.predicted_exponent = 1 - 1 / beta;
    const double pred = std::pow(boost::math::tgamma(beta) * A, 1 / beta) * beta / (beta - 1) *
                        std::pow(T, 1 - 1 / beta);
    r.ratio = s.log_lambda.back() / pred;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < s.times.size(); ++i)
      if (s.times[i] >= T / 10 && s.log_lambda[i] > 0) x.push_back(std::log(s.times[i])), y.push_back(std::log(s.log_lambda[i]));
    r.fitted_exponent = slope(x, y);
  } else {
    r.predicted_exponent = -(2 - beta);
    r.fitted_exponent = loglog_slope(s, T / 10, T);
    r.ratio = r.fitted_exponent / r.predicted_exponent;
  }
  return r;
}

}  // namespace hdflow::toy
