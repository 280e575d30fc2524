#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hdflow/flow_kinematics.hpp"
#include "hdflow/renorm_ode.hpp"

namespace hdflow::moments {

struct CollisionKernel {
  std::function<double(double)> angular;  // B(x) on [-1, 1]
  double gamma = 0.0;
};

// b = 3 pi int_{-1}^{1} B(x) x^2 (1 - x^2) dx
double collision_b(const CollisionKernel& kernel);

// Symmetric 3x3 stored as (11, 12, 13, 22, 23, 33).
using Sym3 = std::array<double, 6>;
enum : int { M11 = 0, M12, M13, M22, M23, M33 };
inline constexpr const char* kSym3Names[6] = {"M11", "M12", "M13", "M22", "M23", "M33"};

flow::Mat3 to_matrix(const Sym3& s);
Sym3 from_matrix(const flow::Mat3& m);  // symmetrizes

struct ShearParams {
  double K1 = 0.0, K2 = 0.0, K3 = 0.0;
  double b = 0.0;
  bool retain_k2 = true;
};

// Velocity gradient of the combined orthogonal shear,
// [[0, K3, K2 - t K1 K3], [0, 0, K1], [0, 0, 0]].
flow::Mat3 shear_L(const ShearParams& p, double t);

// dM/dt = -(L M + M L^T) - 2b (M - m I), m = tr M / 3.
Sym3 moment_rhs(const Sym3& M, double t, const ShearParams& p);

struct MomentState {
  double t;
  double log_scale;  // S
  Sym3 unit;         // U with max |U_ij| = 1; M = exp(S) U
  double log_abs(int k) const;
  flow::Mat3 physical() const { return to_matrix(unit) * std::exp(log_scale); }
};

struct MomentSeries {
  ShearParams params;
  std::vector<MomentState> states;
  std::vector<double> times() const;
  std::vector<double> log_scales() const;
};

// Requires M0 symmetric positive semidefinite and nonzero.
MomentSeries integrate_moments(const Sym3& M0, const ShearParams& p, double T, const RenormOptions& opt = {});

struct GrowthFit {
  double c1 = 0, c2 = 0, c3 = 0;
  double residual = 0;  // RMS of the fit on the window
  double t0 = 0, t1 = 0;
  int points = 0;
  bool window_heuristic_ok = true;  // S(t0) > 10 |c2| t0
};

// Least squares S ~ c1 t^{5/3} + c2 t + c3 on [t0, t1].
GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& S, double t0, double t1);
GrowthFit fit_growth(const MomentSeries& s, double t0, double t1);

// Leading-order growth rate dS0/dt = (4b/3)^{1/3} (K1 K3)^{2/3} t^{2/3} and
// its antiderivative amplitude (3/5)(4b/3)^{1/3}(K1 K3)^{2/3}.
double predicted_dS0(double t, double K1, double K3, double b);
double predicted_c1(double K1, double K3, double b);
inline double predicted_c2(double b) { return -4.0 * b / 3.0; }

struct RatioRow {
  double t;
  double r13_11, p13_11;
  double r33_13, p33_13;
  double r11_33, p11_33;
  double r22_11, p22_11;
};

std::vector<RatioRow> moment_ratio_diagnostics(const MomentSeries& s, double K1, double K3, double b);

}  // namespace hdflow::moments
