#pragma once

#include <complex>
#include <functional>

#include "hdflow/profile.hpp"
#include "hdflow/toy_model.hpp"

namespace hdflow::dispersion {

using cplx = std::complex<double>;

// Lambda(z,k) = int_0^inf e^{-zt} (1+t)^{beta-1-ik} dt, Re z > 0.
cplx lambda_transform(cplx z, double k, double beta);
// int_0^inf e^{-zt} (1+t)^{beta-1-ik} g(t) dt, the same quadrature with an extra factor.
cplx laplace_weighted(cplx z, double k, double beta, const std::function<double(double)>& g);

struct DispersionRoot {
  double k = 0, beta = 0, epsilon = 0;
  cplx z0;
  double residual = 0;  // |1 - eps Lambda(z0, k)|, re-evaluated after the solve
};

// Real root for k = 0 (safeguarded Newton on log z, seeded by (Gamma(beta) eps)^{1/beta});
// complex Newton continued from k = 0 otherwise. Throws ToleranceError when
// the residual cannot be brought below 1e-10, InvalidArgument when the root
// would fall below 1e-100.
DispersionRoot solve_root(double epsilon, double k, double beta);

struct FrontCoefficients {
  double epsilon = 0, beta = 0;
  double z0 = 0;
  double A1 = 0;     // Im dz0/dk at k = 0; negative, the front moves to +X at rate -A1
  double A2 = 0;     // -Re d^2z0/dk^2 / 2 at k = 0
  double B_eps = 0;  // int e^{-z0 t} t (1+t)^{beta-1} dt
};

// Central differences in k with steps 1e-3 and 5e-4, Richardson-combined.
FrontCoefficients front_coefficients(double epsilon, double beta);

struct MomentGrowth {
  double rate = 0;                  // exact root z0(0; eps)
  double amplitude = 0;             // C_beta / (eps B_eps), residue at the exact root
  double rate_asymptotic = 0;       // (Gamma(beta) eps)^{1/beta}
  double amplitude_asymptotic = 0;  // (Gamma(beta) eps)^{1/beta} / beta * C_beta
};

MomentGrowth predicted_moment_growth(double epsilon, double beta, const toy::InitialProfile& profile);
MomentGrowth predicted_moment_growth(double epsilon, double beta, double C_beta);

struct FrontReport {
  double t = 0;
  double sup_distance = 0;  // between the normalized slice and normalized Q
  double argmax_X = 0;
  double predicted_center = 0;  // -A1 t
  double width = 0;             // sqrt(A2 t)
};

// Q(xi) = exp(-xi^2/4)/sqrt(2)
inline double front_Q(double xi) { return std::exp(-0.25 * xi * xi) / std::sqrt(2.0); }

// Slice Phi(t,X) e^{beta X} in xi = (X + A1 t)/sqrt(A2 t), both curves scaled
// to unit integral in xi. t must be a field grid time.
FrontReport front_profile_check(const toy::ToyField& field, const FrontCoefficients& c, double beta, double t);

// Least-squares rate of the slice argmax over grid times in [t0, t1].
double front_drift(const toy::ToyField& field, double beta, double t0, double t1);

}  // namespace hdflow::dispersion
