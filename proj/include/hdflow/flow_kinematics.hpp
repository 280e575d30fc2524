#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace hdflow::flow {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

// Coefficients of det(I + tA) = 1 + c1 t + c2 t^2 + c3 t^3.
struct DetPoly {
  double c1, c2, c3;
  double operator()(double t) const { return 1.0 + t * (c1 + t * (c2 + t * c3)); }
};
DetPoly det_polynomial(const Mat3& A);

class DeformationMatrix {
 public:
  explicit DeformationMatrix(const Mat3& A);

  const Mat3& entries() const { return A_; }
  // First t > 0 with det(I + tA) = 0, or +inf.
  double horizon() const { return horizon_; }
  bool global() const { return horizon_ == std::numeric_limits<double>::infinity(); }

 private:
  Mat3 A_;
  double horizon_;
};

// L(t) = (I + tA)^{-1} A.
Mat3 evolve_L(const DeformationMatrix& A, double t);

enum class FlowCase {
  HomogeneousDilatation,
  CylindricalDilatation,
  CylindricalDilatationShear,
  PlanarShear,
  SimpleShear,
  SimpleShearDecayingPlanar,
  CombinedOrthogonalShear,
};
const char* case_name(FlowCase c);

struct FlowClassification {
  FlowCase label;
  std::map<std::string, double> parameters;  // K or K1, K2, K3
  double residual;                           // max over probes of |L - template|_max * t^2
  Mat3 basis;                                // columns: template axes e1, e2, e3 (orthonormal)

  double param(const std::string& name) const;
  // Template expressed in the template axes.
  Mat3 template_local(double t) const;
  // Template rotated back to the coordinates of A.
  Mat3 template_at(double t) const { return basis * template_local(t) * basis.transpose(); }
};

inline constexpr double kEigenTol = 1e-9;
inline const double kProbeTimes[3] = {1e2, 1e3, 1e4};

// Requires a global flow; throws HorizonExceeded otherwise and
// ClassificationFailure when no template fits (including A = 0).
FlowClassification classify_flow(const DeformationMatrix& A);

// rho0 * exp(-int_0^t Tr L), cross-checked against rho0 / det(I + tA).
double density_evolution(const DeformationMatrix& A, double rho0, double t);

// B(t) = (I + tA)^{-1} B0.
Vec3 drift_offset(const DeformationMatrix& A, const Vec3& B0, double t);

struct HydroState {
  double rho;
  double eps;
  Vec3 drift;
};

// r = rho * d(eps)/dt + Tr(M L) on a (possibly nonuniform) grid, with
// second-order three-point differences, one-sided at the ends.
std::vector<double> energy_balance_residual(const std::vector<double>& times, const std::vector<Mat3>& M,
                                            const DeformationMatrix& A, const std::vector<double>& rho,
                                            const std::vector<double>& eps);

// Derivative of a sampled series with the same stencil.
std::vector<double> differentiate(const std::vector<double>& times, const std::vector<double>& f);

}  // namespace hdflow::flow
