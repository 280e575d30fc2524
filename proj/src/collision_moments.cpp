#include "hdflow/collision_moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdflow/errors.hpp"
#include "hdflow/quadrature.hpp"

namespace hdflow::moments {

using flow::Mat3;

double collision_b(const CollisionKernel& kernel) {
  if (!kernel.angular) throw InvalidArgument("collision kernel has no angular profile");
  auto f = [&](double x) {
    double B = kernel.angular(x);
    if (!(B >= 0)) throw InvalidArgument("angular profile must be nonnegative and finite");
    return B * x * x * (1 - x * x);
  };
  quad::Tol tol;
  tol.rel = 1e-12;
  tol.abs = 1e-300;
  double I;
  try {
    // tanh-sinh copes with integrable endpoint singularities of B.
    I = quad::ts(f, -1.0, 1.0, tol);
  } catch (const ToleranceError&) {
    throw InvalidArgument("angular profile is not integrable against x^2(1-x^2)");
  }
  if (!std::isfinite(I)) throw InvalidArgument("angular profile is not integrable against x^2(1-x^2)");
  return 3 * std::numbers::pi * I;
}

Mat3 to_matrix(const Sym3& s) {
  Mat3 m;
  m << s[M11], s[M12], s[M13], s[M12], s[M22], s[M23], s[M13], s[M23], s[M33];
  return m;
}

Sym3 from_matrix(const Mat3& m) {
  return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
          m(1, 1), 0.5 * (m(1, 2) + m(2, 1)), m(2, 2)};
}

Mat3 shear_L(const ShearParams& p, double t) {
  Mat3 L = Mat3::Zero();
  L(0, 1) = p.K3;
  L(0, 2) = (p.retain_k2 ? p.K2 : 0.0) - t * p.K1 * p.K3;
  L(1, 2) = p.K1;
  return L;
}

Sym3 moment_rhs(const Sym3& M, double t, const ShearParams& p) {
  const double K1 = p.K1, K3 = p.K3;
  const double c13 = (p.retain_k2 ? p.K2 : 0.0) - t * K1 * K3;  // L13
  const double m = (M[M11] + M[M22] + M[M33]) / 3.0;
  const double b2 = 2 * p.b;
  // Written out: -(L M + M L^T) with L strictly upper triangular.
  Sym3 d;
  d[M11] = -2 * (K3 * M[M12] + c13 * M[M13]) - b2 * (M[M11] - m);
  d[M12] = -(K3 * M[M22] + c13 * M[M23] + K1 * M[M13]) - b2 * M[M12];
  d[M13] = -(K3 * M[M23] + c13 * M[M33]) - b2 * M[M13];
  d[M22] = -2 * K1 * M[M23] - b2 * (M[M22] - m);
  d[M23] = -K1 * M[M33] - b2 * M[M23];
  d[M33] = -b2 * (M[M33] - m);
  return d;
}

double MomentState::log_abs(int k) const { return log_scale + std::log(std::abs(unit[k])); }

std::vector<double> MomentSeries::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

std::vector<double> MomentSeries::log_scales() const {
  std::vector<double> v;
  v.reserve(states.size());
  for (const auto& s : states) v.push_back(s.log_scale);
  return v;
}

MomentSeries integrate_moments(const Sym3& M0, const ShearParams& p, double T, const RenormOptions& opt) {
  for (double v : M0)
    if (!std::isfinite(v)) throw InvalidArgument("initial moments must be finite");
  Eigen::SelfAdjointEigenSolver<Mat3> es(to_matrix(M0));
  double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0)) throw InvalidArgument("initial moment tensor is zero");
  if (es.eigenvalues().minCoeff() < -1e-12 * top) throw InvalidArgument("initial moment tensor is not positive semidefinite");
  if (!(T > 0) || !std::isfinite(T)) throw InvalidArgument("integration horizon T must be positive and finite");

  LinearRhs rhs = [&p](const std::vector<double>& x, std::vector<double>& dx, double t) {
    Sym3 m;
    std::copy(x.begin(), x.end(), m.begin());
    Sym3 d = moment_rhs(m, t, p);
    std::copy(d.begin(), d.end(), dx.begin());
  };
  auto samples = integrate_renormalized(rhs, std::vector<double>(M0.begin(), M0.end()), 0.0, T, opt);

  MomentSeries out;
  out.params = p;
  out.states.reserve(samples.size());
  for (auto& s : samples) {
    MomentState st;
    st.t = s.t;
    st.log_scale = s.log_scale;
    std::copy(s.unit.begin(), s.unit.end(), st.unit.begin());
    out.states.push_back(st);
  }
  return out;
}

GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& S, double t0, double t1) {
  if (t.size() != S.size()) throw InvalidArgument("fit_growth: size mismatch");
  if (!(t1 > t0)) throw InvalidArgument("fit_growth: empty window");
  if (t.empty() || t0 < t.front() - 1e-12 || t1 > t.back() + 1e-12)
    throw InvalidArgument("fit_growth: window outside the integrated span");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 - 1e-12 && t[i] <= t1 + 1e-12) idx.push_back(i);
  if (idx.size() < 4) throw ResolutionError("fit_growth: fewer than four samples in the window");

  // Regressors scaled to unit column norm before Householder QR.
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double ti = t[idx[r]];
    X(r, 0) = std::pow(ti, 5.0 / 3.0);
    X(r, 1) = ti;
    X(r, 2) = 1.0;
    y(r) = S[idx[r]];
  }
  Eigen::Vector3d colscale = X.colwise().norm().transpose();
  for (int c = 0; c < 3; ++c) X.col(c) /= colscale(c);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::MatrixXd R = qr.matrixQR().topRows(3).triangularView<Eigen::Upper>();
  double rmin = R.diagonal().cwiseAbs().minCoeff(), rmax = R.diagonal().cwiseAbs().maxCoeff();
  if (!(rmin > 1e-9 * rmax)) throw ResolutionError("fit_growth: window too short, regressors nearly collinear");
  Eigen::Vector3d c = qr.solve(y);
  for (int k = 0; k < 3; ++k) c(k) /= colscale(k);

  GrowthFit g;
  g.c1 = c(0);
  g.c2 = c(1);
  g.c3 = c(2);
  double ss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    double ti = t[idx[r]];
    double e = S[idx[r]] - (g.c1 * std::pow(ti, 5.0 / 3.0) + g.c2 * ti + g.c3);
    ss += e * e;
  }
  g.residual = std::sqrt(ss / static_cast<double>(n));
  g.t0 = t0;
  g.t1 = t1;
  g.points = static_cast<int>(n);
  g.window_heuristic_ok = S[idx.front()] > 10 * std::abs(g.c2) * t[idx.front()];
  return g;
}

GrowthFit fit_growth(const MomentSeries& s, double t0, double t1) { return fit_growth(s.times(), s.log_scales(), t0, t1); }

double predicted_dS0(double t, double K1, double K3, double b) {
  return std::cbrt(4 * b / 3) * std::pow(std::abs(K1 * K3), 2.0 / 3.0) * std::pow(t, 2.0 / 3.0);
}

double predicted_c1(double K1, double K3, double b) {
  return 0.6 * std::cbrt(4 * b / 3) * std::pow(std::abs(K1 * K3), 2.0 / 3.0);
}

std::vector<RatioRow> moment_ratio_diagnostics(const MomentSeries& s, double K1, double K3, double b) {
  if (!(b > 0) || K1 * K3 == 0.0) throw InvalidArgument("ratio diagnostics need b > 0 and K1 K3 != 0");
  std::vector<RatioRow> rows;
  for (const auto& st : s.states) {
    if (st.t <= 0) continue;
    const auto& U = st.unit;
    for (int k : {M11, M13, M33, M22})
      if (std::abs(U[k]) < 1e-300) throw ToleranceError("ratio diagnostics: vanishing moment " + std::string(kSym3Names[k]));
    double dS = predicted_dS0(st.t, K1, K3, b);
    double kk = K1 * K3;
    RatioRow r;
    r.t = st.t;
    r.r13_11 = U[M13] / U[M11];
    r.p13_11 = dS / (2 * st.t * kk);
    r.r33_13 = U[M33] / U[M13];
    r.p33_13 = dS / (st.t * kk);
    r.r11_33 = U[M11] / U[M33];
    r.p11_33 = 3 * dS / (2 * b);
    r.r22_11 = U[M22] / U[M11];
    r.p22_11 = 2 * b / (3 * dS);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hdflow::moments
