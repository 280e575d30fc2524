#pragma once

#include <vector>

#include "hdflow/frozen_flows.hpp"

namespace hdflow::entropy {

using frozen::FlowImage;
using frozen::VelocityProfile;

// Raw integrals of a velocity density. energy is centred on the mean velocity.
struct GasIntegrals {
  double mass = 0;
  double entropy = 0;  // -int g log g, with 0 log 0 = 0
  double energy = 0;   // int |w - u|^2 g
  frozen::Vec3 mean = frozen::Vec3::Zero();
};

GasIntegrals gas_integrals(const FlowImage& g, const quad::Tol& tol = {});

struct EntropyReport {
  double s = 0;    // -int g log g
  double rho = 0;  // int g
  double eps = 0;  // energy per unit mass
  double s_per_particle = 0;
  double C_G = 0;        // of g itself
  double residual = 0;   // against the reference constant
};

// -int g log g / int g. Throws ToleranceError if the integral diverges.
double entropy_per_particle(const FlowImage& g, const quad::Tol& tol = {});
double entropy_per_particle(const VelocityProfile& g, const quad::Tol& tol = {});

// C_G = -int G log G / int G - log[(int |xi|^2 G)^{3/2} / (int G)^{5/2}].
double c_g(const FlowImage& G, const quad::Tol& tol = {});
double c_g(const VelocityProfile& G, const quad::Tol& tol = {});
// (3/2)(1 + ln pi - ln(3/2)): the value for any Maxwellian.
double c_g_maxwellian();

// s/rho - log(eps^{3/2}/rho) - reference_C_G, where g must integrate to rho.
double ideal_form_residual(const FlowImage& g, double rho, double reference_C_G = c_g_maxwellian(),
                           const quad::Tol& tol = {});

EntropyReport report(const FlowImage& g, double reference_C_G = c_g_maxwellian(), const quad::Tol& tol = {});

struct MaxEntropyReport {
  double maxwellian_C_G = 0;
  std::vector<double> candidates_C_G;
  bool maxwellian_wins = false;
};

// At fixed mass and energy the entropy ordering is the C_G ordering.
MaxEntropyReport max_entropy_check(const std::vector<FlowImage>& candidates, const quad::Tol& tol = {});

}  // namespace hdflow::entropy
