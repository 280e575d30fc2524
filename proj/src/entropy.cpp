#include "hdflow/entropy.hpp"

#include <cmath>
#include <numbers>

#include "hdflow/errors.hpp"

namespace hdflow::entropy {

GasIntegrals gas_integrals(const FlowImage& g, const quad::Tol& tol) {
  GasIntegrals out;
  out.mass = frozen::mass(g, tol);
  if (!(out.mass > 0) || !std::isfinite(out.mass)) throw ToleranceError("density has no finite positive mass");
  // Signed integrand: an absolute floor keeps the relative target meaningful
  // when the entropy itself is close to zero.
  quad::Tol st = tol;
  st.abs = std::max(tol.abs, 1e-13 * out.mass);
  out.entropy = frozen::integrate(
      g, [](const frozen::Vec3&, double v) { return v > 1e-300 ? -v * std::log(v) : 0.0; }, st);
  if (!std::isfinite(out.entropy)) throw ToleranceError("entropy integral diverges");
  out.mean = frozen::mean_velocity(g, tol);
  const frozen::Vec3 u = out.mean;
  out.energy = frozen::integrate(g, [&u](const frozen::Vec3& w, double v) { return (w - u).squaredNorm() * v; }, tol);
  if (!(out.energy > 0) || !std::isfinite(out.energy)) throw ToleranceError("energy integral diverges or vanishes");
  return out;
}

double entropy_per_particle(const FlowImage& g, const quad::Tol& tol) {
  const double m = frozen::mass(g, tol);
  if (!(m > 0) || !std::isfinite(m)) throw ToleranceError("density has no finite positive mass");
  quad::Tol st = tol;
  st.abs = std::max(tol.abs, 1e-13 * m);
  const double s = frozen::integrate(
      g, [](const frozen::Vec3&, double v) { return v > 1e-300 ? -v * std::log(v) : 0.0; }, st);
  if (!std::isfinite(s)) throw ToleranceError("entropy integral diverges");
  return s / m;
}

double entropy_per_particle(const VelocityProfile& g, const quad::Tol& tol) {
  return entropy_per_particle(frozen::identity(g), tol);
}

namespace {
double c_g_from(const GasIntegrals& I) {
  return I.entropy / I.mass - (1.5 * std::log(I.energy) - 2.5 * std::log(I.mass));
}
}  // namespace

double c_g(const FlowImage& G, const quad::Tol& tol) { return c_g_from(gas_integrals(G, tol)); }

double c_g(const VelocityProfile& G, const quad::Tol& tol) { return c_g(frozen::identity(G), tol); }

double c_g_maxwellian() { return 1.5 * (1 + std::log(std::numbers::pi) - std::log(1.5)); }

EntropyReport report(const FlowImage& g, double reference_C_G, const quad::Tol& tol) {
  const auto I = gas_integrals(g, tol);
  EntropyReport r;
  r.s = I.entropy;
  r.rho = I.mass;
  r.eps = I.energy / I.mass;
  r.s_per_particle = I.entropy / I.mass;
  r.C_G = c_g_from(I);
  r.residual = r.s_per_particle - std::log(std::pow(r.eps, 1.5) / r.rho) - reference_C_G;
  return r;
}

double ideal_form_residual(const FlowImage& g, double rho, double reference_C_G, const quad::Tol& tol) {
  const auto r = report(g, reference_C_G, tol);
  if (!(std::abs(r.rho - rho) <= 1e-8 * std::abs(rho)))
    throw InvalidArgument("density integrates to " + std::to_string(r.rho) + ", not rho = " + std::to_string(rho));
  return r.residual;
}

MaxEntropyReport max_entropy_check(const std::vector<FlowImage>& candidates, const quad::Tol& tol) {
  MaxEntropyReport out;
  out.maxwellian_C_G = c_g_maxwellian();
  out.maxwellian_wins = true;
  for (const auto& g : candidates) {
    out.candidates_C_G.push_back(c_g(g, tol));
    if (out.candidates_C_G.back() > out.maxwellian_C_G) out.maxwellian_wins = false;
  }
  return out;
}

}  // namespace hdflow::entropy
