#include "hdflow/flow_kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hdflow/errors.hpp"
#include "hdflow/quadrature.hpp"

namespace hdflow::flow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Mat3& M) { return M.cwiseAbs().maxCoeff(); }

// Positive roots of c0 + c1 t + c2 t^2, ascending.
std::vector<double> positive_quadratic_roots(double c0, double c1, double c2) {
  std::vector<double> r;
  if (c2 == 0.0) {
    if (c1 != 0.0 && -c0 / c1 > 0) r.push_back(-c0 / c1);
    return r;
  }
  double disc = c1 * c1 - 4 * c2 * c0;
  if (disc < 0) return r;
  double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  double a = q / c2;
  double b = q != 0.0 ? c0 / q : a;
  for (double x : {a, b})
    if (x > 0 && std::isfinite(x)) r.push_back(x);
  std::sort(r.begin(), r.end());
  return r;
}

// Evaluated from the matrix rather than the expanded cubic: near a multiple
// root the expanded form loses most of its digits.
struct DetEval {
  const Mat3& A;
  double operator()(double t) const { return (Mat3::Identity() + t * A).determinant(); }
};

template <class P>
double bisect(const P& p, double lo, double hi) {
  // p(lo) > 0 >= p(hi)
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    if (p(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

double find_horizon(const Mat3& A) {
  const DetPoly p = det_polynomial(A);
  const DetEval det{A};
  // Sample at the critical points of p (where a touch-down could hide) and on
  // a doubling sequence; p is monotone between consecutive samples, so the
  // first sample with p <= 0 brackets the first root.
  std::vector<double> pts = positive_quadratic_roots(p.c1, 2 * p.c2, 3 * p.c3);
  double lead = p.c3 != 0.0 ? p.c3 : (p.c2 != 0.0 ? p.c2 : p.c1);
  bool must_cross = lead < 0;
  double prev = 0.0;
  std::size_t i = 0;
  double doubling = 1.0;
  while (true) {
    double next;
    if (i < pts.size() && pts[i] <= doubling) {
      next = pts[i++];
    } else if (must_cross || i < pts.size()) {
      next = doubling;
      doubling *= 2;
    } else {
      return kInf;
    }
    if (det(next) <= 0) return bisect(det, prev, next);
    prev = next;
    if (doubling > 1e300) return kInf;
  }
}

}  // namespace

DetPoly det_polynomial(const Mat3& A) {
  double tr = A.trace();
  double tr2 = (A * A).trace();
  DetPoly p{tr, 0.5 * (tr * tr - tr2), A.determinant()};
  // Float noise in the invariants of a nilpotent A would otherwise invent a
  // horizon near t ~ 1e16^(1/3).
  double s = std::max(max_abs(A), 1e-300);
  if (std::abs(p.c1) < 1e-13 * s) p.c1 = 0.0;
  if (std::abs(p.c2) < 1e-13 * s * s) p.c2 = 0.0;
  if (std::abs(p.c3) < 1e-13 * s * s * s) p.c3 = 0.0;
  return p;
}

DeformationMatrix::DeformationMatrix(const Mat3& A) : A_(A) {
  if (!A.allFinite()) throw InvalidArgument("deformation matrix has non-finite entries");
  horizon_ = find_horizon(A);
}

Mat3 evolve_L(const DeformationMatrix& D, double t) {
  if (t < 0) throw InvalidArgument("evolve_L: t must be nonnegative");
  if (t >= D.horizon()) throw HorizonExceeded(t, D.horizon());
  const Mat3& A = D.entries();
  Mat3 M = Mat3::Identity() + t * A;
  Eigen::FullPivLU<Mat3> lu(M);
  if (!lu.isInvertible()) throw HorizonExceeded(t, D.horizon());
  Mat3 left = lu.solve(A);
  // A commutes with (I + tA), hence with its inverse.
  Mat3 inv = lu.inverse();
  Mat3 right = A * inv;
  double scale = std::max(max_abs(left), 1e-300);
  double cond = max_abs(M) * max_abs(inv);
  if (max_abs(left - right) > 1e-12 * std::max(1.0, cond) * scale + 1e-300)
    throw ToleranceError("evolve_L: (I+tA)^-1 A and A (I+tA)^-1 disagree beyond round-off");
  return left;
}

const char* case_name(FlowCase c) {
  switch (c) {
    case FlowCase::HomogeneousDilatation: return "HomogeneousDilatation";
    case FlowCase::CylindricalDilatation: return "CylindricalDilatation";
    case FlowCase::CylindricalDilatationShear: return "CylindricalDilatationShear";
    case FlowCase::PlanarShear: return "PlanarShear";
    case FlowCase::SimpleShear: return "SimpleShear";
    case FlowCase::SimpleShearDecayingPlanar: return "SimpleShearDecayingPlanar";
    case FlowCase::CombinedOrthogonalShear: return "CombinedOrthogonalShear";
  }
  return "?";
}

double FlowClassification::param(const std::string& name) const {
  auto it = parameters.find(name);
  if (it == parameters.end()) throw InvalidArgument("classification has no parameter " + name);
  return it->second;
}

Mat3 FlowClassification::template_local(double t) const {
  Mat3 T = Mat3::Zero();
  switch (label) {
    case FlowCase::HomogeneousDilatation:
      T = Mat3::Identity() / t;
      break;
    case FlowCase::CylindricalDilatation:
    case FlowCase::CylindricalDilatationShear:
      T(0, 0) = 1;
      T(1, 1) = 1;
      T(0, 2) = param("K");
      T /= t;
      break;
    case FlowCase::PlanarShear:
      T(1, 2) = param("K");
      T(2, 2) = 1;
      T /= t;
      break;
    case FlowCase::SimpleShear:
      T(0, 1) = param("K");
      break;
    case FlowCase::SimpleShearDecayingPlanar: {
      double K1 = param("K1"), K2 = param("K2"), K3 = param("K3");
      T(0, 1) = K1 * K3 / t + K2;
      T(0, 2) = K1 / t;
      T(2, 1) = K3 / t;
      T(2, 2) = 1 / t;
      break;
    }
    case FlowCase::CombinedOrthogonalShear: {
      double K1 = param("K1"), K2 = param("K2"), K3 = param("K3");
      T(0, 1) = K3;
      T(0, 2) = K2 - t * K1 * K3;
      T(1, 2) = K1;
      break;
    }
  }
  return T;
}

namespace {

// Right-handed orthonormal frame with the given first two axes.
Mat3 frame(const Vec3& e1, const Vec3& e2) {
  Mat3 Q;
  Q.col(0) = e1;
  Q.col(1) = e2;
  Q.col(2) = e1.cross(e2);
  return Q;
}

// Any unit vector orthogonal to the unit vector a.
Vec3 orthogonal_to(const Vec3& a) {
  Vec3 trial = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 v = trial - a.dot(trial) * a;
  return v.normalized();
}

int numeric_rank(const Mat3& M, double tol) {
  Eigen::ColPivHouseholderQR<Mat3> qr(M);
  qr.setThreshold(tol / std::max(max_abs(M), 1e-300));
  return static_cast<int>(qr.rank());
}

}  // namespace

FlowClassification classify_flow(const DeformationMatrix& D) {
  if (!D.global()) throw HorizonExceeded(kInf, D.horizon());
  const Mat3& A = D.entries();
  const double scale = max_abs(A);
  if (scale <= kEigenTol) throw ClassificationFailure("A = 0: no flow, none of the seven templates applies");

  // Number of nonzero eigenvalues = rank(A^3). Counting eigenvalues directly
  // is unreliable: round-off splits a nilpotent Jordan block of size k into
  // eigenvalues of size eps^(1/k), far above any sensible tolerance.
  Mat3 A3 = A * A * A;
  Eigen::JacobiSVD<Mat3> svd3(A3, Eigen::ComputeFullU | Eigen::ComputeFullV);
  int nonzero = 0;
  const double s3 = std::max(scale * scale * scale, 1.0);
  for (int i = 0; i < 3; ++i)
    if (svd3.singularValues()(i) > std::max(kEigenTol * kEigenTol * kEigenTol, 1e-12 * s3)) ++nonzero;

  FlowClassification out;
  out.basis = Mat3::Identity();

  // Spectral projector onto the invariant subspace of the nonzero eigenvalues:
  // range(A^3) along ker(A^3).
  Mat3 P = Mat3::Zero();
  if (nonzero == 3) {
    P = Mat3::Identity();
  } else if (nonzero > 0) {
    Mat3 Q;
    for (int j = 0; j < nonzero; ++j) Q.col(j) = svd3.matrixU().col(j);
    for (int j = nonzero; j < 3; ++j) Q.col(j) = svd3.matrixV().col(j);
    Mat3 Dg = Mat3::Zero();
    for (int j = 0; j < nonzero; ++j) Dg(j, j) = 1;
    P = Q * Dg * Q.inverse();
  }
  Mat3 N0 = A * (Mat3::Identity() - P);
  const double ktol = 1e-9 * std::max(1.0, scale);

  switch (nonzero) {
    case 3:
      out.label = FlowCase::HomogeneousDilatation;
      break;
    case 2: {
      Vec3 u1 = svd3.matrixU().col(0), u2 = svd3.matrixU().col(1);
      Vec3 n = u1.cross(u2).normalized();
      Vec3 v = P * n;  // lies in the dilating plane
      double K = v.norm();
      Vec3 e1 = K > ktol ? Vec3(v / K) : u1;
      out.basis = frame(e1, n.cross(e1));
      out.parameters["K"] = K;
      out.label = K > ktol ? FlowCase::CylindricalDilatationShear : FlowCase::CylindricalDilatation;
      break;
    }
    case 1: {
      Vec3 r = svd3.matrixU().col(0);
      Vec3 ell = P.transpose() * r;  // P = r ell^T
      int rn = numeric_rank(N0, ktol);
      if (rn == 0) {
        // Template axes: e3 along the unit row vector of P, so the column
        // vector reads K e2 + e3.
        Vec3 e3 = ell.normalized();
        Vec3 rr = r * ell.norm();
        Vec3 m = rr - rr.dot(e3) * e3;
        double K = m.norm();
        Vec3 e2 = K > ktol ? Vec3(m / K) : orthogonal_to(e3);
        out.basis = frame(e2.cross(e3), e2);
        out.parameters["K"] = K;
        out.label = FlowCase::PlanarShear;
      } else {
        Eigen::JacobiSVD<Mat3> sv(N0, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Vec3 e1 = sv.matrixU().col(0), e2 = sv.matrixV().col(0);
        out.basis = frame(e1, e2);
        Mat3 Pb = out.basis.transpose() * P * out.basis;
        out.parameters["K1"] = Pb(0, 2);
        out.parameters["K2"] = sv.singularValues()(0);
        out.parameters["K3"] = Pb(2, 1);
        out.label = FlowCase::SimpleShearDecayingPlanar;
      }
      break;
    }
    default: {
      int rn = numeric_rank(A, ktol);
      if (rn == 1) {
        Eigen::JacobiSVD<Mat3> sv(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
        out.basis = frame(sv.matrixU().col(0), sv.matrixV().col(0));
        out.parameters["K"] = sv.singularValues()(0);
        out.label = FlowCase::SimpleShear;
      } else {
        Mat3 A2 = A * A;
        Eigen::JacobiSVD<Mat3> sv(A2, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Vec3 e1 = sv.matrixU().col(0), e3 = sv.matrixV().col(0);
        Vec3 e2 = e3.cross(e1);
        Mat3 Q;
        Q << e1, e2, e3;
        Mat3 Ab = Q.transpose() * A * Q;
        if (Ab(0, 1) < 0) Q.col(0) = -Q.col(0);
        Ab = Q.transpose() * A * Q;
        if (Ab(1, 2) < 0) Q.col(2) = -Q.col(2);
        Ab = Q.transpose() * A * Q;
        out.basis = Q;
        out.parameters["K1"] = Ab(1, 2);
        out.parameters["K2"] = Ab(0, 2);
        out.parameters["K3"] = Ab(0, 1);
        out.label = FlowCase::CombinedOrthogonalShear;
      }
      break;
    }
  }

  // Verify at the probe times. A correct template leaves an O(1/t^2)
  // remainder, so the gap relative to the template shrinks with t; a wrong
  // one leaves an O(1) relative gap.
  double residual = 0.0;
  double rel[3];
  for (int i = 0; i < 3; ++i) {
    double t = kProbeTimes[i];
    Mat3 L = evolve_L(D, t);
    Mat3 T = out.template_at(t);
    double gap = max_abs(L - T);
    residual = std::max(residual, gap * t * t);
    rel[i] = gap / std::max(max_abs(T), 1e-300);
  }
  out.residual = residual;
  bool fits = rel[2] <= 1e-9 || rel[2] <= 0.5 * rel[1] || rel[2] <= 1e-3;
  if (!fits)
    throw ClassificationFailure(std::string("template ") + case_name(out.label) +
                                " does not match L(t) at the probe times (relative gap " + std::to_string(rel[2]) + ")");
  return out;
}

double density_evolution(const DeformationMatrix& D, double rho0, double t) {
  if (!(rho0 > 0)) throw InvalidArgument("density_evolution: rho0 must be positive");
  if (t < 0) throw InvalidArgument("density_evolution: t must be nonnegative");
  if (t >= D.horizon()) throw HorizonExceeded(t, D.horizon());
  double integral = 0.0;
  if (t > 0) {
    // s = e^u - 1 spreads the 1/(1+s) decay of Tr L evenly over u.
    auto trace = [&](double u) {
      double e = std::exp(u);
      return evolve_L(D, e - 1.0).trace() * e;
    };
    quad::Tol tol;
    tol.rel = 1e-13;
    tol.abs = 1e-14 * t;
    integral = quad::gk(trace, 0.0, std::log1p(t), tol);
  }
  double rho = rho0 * std::exp(-integral);
  double det = (Mat3::Identity() + t * D.entries()).determinant();
  double rho_det = rho0 / det;
  if (std::abs(rho - rho_det) > 1e-9 * rho_det)
    throw ToleranceError("density_evolution: quadrature and determinant formulas disagree");
  return rho;
}

Vec3 drift_offset(const DeformationMatrix& D, const Vec3& B0, double t) {
  if (t < 0) throw InvalidArgument("drift_offset: t must be nonnegative");
  if (t >= D.horizon()) throw HorizonExceeded(t, D.horizon());
  return (Mat3::Identity() + t * D.entries()).fullPivLu().solve(B0);
}

std::vector<double> differentiate(const std::vector<double>& x, const std::vector<double>& f) {
  const std::size_t n = x.size();
  if (f.size() != n) throw InvalidArgument("differentiate: grid/value size mismatch");
  if (n < 3) throw InvalidArgument("differentiate: need at least three samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) throw InvalidArgument("differentiate: grid must be strictly increasing");
  // Three-point Lagrange derivative at node j of the stencil (a, b, c).
  auto d3 = [](double x0, double x1, double x2, double f0, double f1, double f2, int at) {
    double xs[3] = {x0, x1, x2}, fs[3] = {f0, f1, f2};
    double xe = xs[at], s = 0.0;
    for (int i = 0; i < 3; ++i) {
      double denom = 1.0, num = 0.0;
      for (int j = 0; j < 3; ++j)
        if (j != i) denom *= xs[i] - xs[j];
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        double prod = 1.0;
        for (int k = 0; k < 3; ++k)
          if (k != i && k != j) prod *= xe - xs[k];
        num += prod;
      }
      s += fs[i] * num / denom;
    }
    return s;
  };
  std::vector<double> d(n);
  d[0] = d3(x[0], x[1], x[2], f[0], f[1], f[2], 0);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = d3(x[i - 1], x[i], x[i + 1], f[i - 1], f[i], f[i + 1], 1);
  d[n - 1] = d3(x[n - 3], x[n - 2], x[n - 1], f[n - 3], f[n - 2], f[n - 1], 2);
  return d;
}

std::vector<double> energy_balance_residual(const std::vector<double>& times, const std::vector<Mat3>& M,
                                            const DeformationMatrix& A, const std::vector<double>& rho,
                                            const std::vector<double>& eps) {
  const std::size_t n = times.size();
  if (M.size() != n || rho.size() != n || eps.size() != n)
    throw InvalidArgument("energy_balance_residual: series are not aligned on one time grid");
  std::vector<double> de = differentiate(times, eps);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = rho[i] * de[i] + (M[i] * evolve_L(A, times[i])).trace();
  return r;
}

}  // namespace hdflow::flow
