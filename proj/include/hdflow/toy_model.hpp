#pragma once

#include <functional>
#include <vector>

#include "hdflow/profile.hpp"

namespace hdflow::toy {

using RateFn = std::function<double(double)>;

// Values of a Volterra solve on the uniform grid t_i = i T/N. log_lambda is
// the primary record; lambda overflows to inf once growth passes ~1e308.
struct ToyMomentSeries {
  double beta = 0;
  std::vector<double> times;
  std::vector<double> lambda;
  std::vector<double> log_lambda;
  std::vector<double> epsilon;
};

// Product-trapezoid weights for int_0^{t_n} y(t_n - xi) (1+xi)^{p} dxi with y
// piecewise linear on the grid xi_m = m h. W[m] multiplies y(t_n - xi_m) for
// 0 < m < n; the m = 0 and m = n endpoints use first() and last(n).
class ProductWeights {
 public:
  ProductWeights(double p, double h, int N);
  double first() const { return I0_[0] - I1_[0]; }
  double interior(int m) const { return W_[m]; }
  double last(int n) const { return I1_[n - 1]; }
  // Interior weights stored reversed: rev()[N - m] = W[m].
  const std::vector<double>& rev() const { return rev_; }
  int N() const { return N_; }
  double h() const { return h_; }

 private:
  int N_;
  double h_;
  std::vector<double> I0_, I1_, W_, rev_;
};

// lambda(t) = C_beta eps(t) (1+t)^{beta-1} + eps(t) int_0^t lambda(t-xi) (1+xi)^{beta-1} dxi
ToyMomentSeries solve_lambda_volterra(double beta, const RateFn& epsilon, const InitialProfile& profile, double T,
                                      int N);
// Same, with C_beta given directly (no profile quadrature).
ToyMomentSeries solve_lambda_volterra(double beta, const RateFn& epsilon, double C_beta, double T, int N);

// Late-time growth rate: least-squares slope of log lambda on [t0, t1].
double log_slope(const ToyMomentSeries& s, double t0, double t1);
// Slope of log lambda against log(1+t) on [t0, t1].
double loglog_slope(const ToyMomentSeries& s, double t0, double t1);

struct ToyField {
  std::vector<double> X;  // uniform
  std::vector<double> t;  // uniform, t[0] = 0
  // phi(i, j) = exp(log_scale[i]) * unit[i][j]
  std::vector<double> log_scale;
  std::vector<std::vector<double>> unit;
  double phi(std::size_t i, std::size_t j) const;
  double dX() const { return X[1] - X[0]; }
  double dt() const { return t[1] - t[0]; }
  // int e^{beta X} Phi(t_i, X) dX by the trapezoid rule on the X grid.
  double lambda(double beta, std::size_t i) const;
};

struct UniformGrid {
  double lo, hi;
  int n;  // number of points
};

struct FieldOptions {
  // Coverage is judged on Phi e^{coverage_beta X}: the solve fails if that
  // weighted row, near the right end of the grid, exceeds coverage_tol times
  // its maximum.
  double coverage_beta = 2.0;
  double coverage_tol = 1e-8;
};

// Phi(t,X) = eps/(1+t) G0(X - log(1+t)) + eps int_0^t Phi(t-xi, X - log(1+xi)) dxi/(1+xi).
// Throws ResolutionError when dX exceeds the smallest shift log(1+dt) or when
// the solution reaches the right end of the X grid.
ToyField solve_field(const InitialProfile& profile, const RateFn& epsilon, const UniformGrid& X, const UniformGrid& t,
                     const FieldOptions& opt = {});

// int int f (rho zeta)^{beta-1} drho dzeta at grid time t (beta = 1 is mass),
// assembled from the field and the separately integrated exp(-int eps).
double reconstruct_total_moment(const ToyField& field, const InitialProfile& profile, const RateFn& epsilon,
                                double beta, double t);

// int_0^t eps by adaptive quadrature.
double integrated_rate(const RateFn& epsilon, double t);

struct SelfConsistentResult {
  double a = 0;
  ToyMomentSeries lambda;        // beta = 1 - a, epsilon filled in
  std::vector<double> log_E;     // int_0^t eps
  std::vector<double> t_eps;     // t * eps(t)
};

// Couples the lambda equation with d/dt exp(int eps) = C (1+t)^{-a} + int lambda(t-xi)(1+xi)^{-a} dxi.
SelfConsistentResult solve_selfconsistent(double a, const InitialProfile& profile, double T, int N);
SelfConsistentResult solve_selfconsistent(double a, double C, double T, int N);

struct AdiabaticReport {
  double beta = 0, A = 0, T = 0;
  // beta > 1: growth of log lambda ~ t^{1-1/beta}; beta < 1: lambda ~ (1+t)^{-(2-beta)}.
  double predicted_exponent = 0;
  double fitted_exponent = 0;
  // beta > 1: log lambda(T) over (Gamma(beta) A)^{1/beta} beta/(beta-1) T^{1-1/beta}.
  double ratio = 0;
  ToyMomentSeries series;
};

// eps(t) = A/(1+t). beta = 1 throws InvalidArgument.
AdiabaticReport adiabatic_check(double beta, double A, double T, int N, const InitialProfile& profile);

}  // namespace hdflow::toy
