// frozen, entropy
#include <cmath>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "hdflow/csv.hpp"
#include "hdflow/entropy.hpp"
#include "hdflow/errors.hpp"
#include "hdflow/frozen_flows.hpp"

namespace hdflow::cli {

namespace {

using frozen::FlowImage;
using frozen::Mat3;
using frozen::Vec3;

std::set<std::string> words(const Params& p, const std::string& key, const std::set<std::string>& allowed) {
  std::set<std::string> out;
  std::stringstream ss(p.text(key));
  std::string w;
  while (std::getline(ss, w, ',')) {
    w.erase(0, w.find_first_not_of(' '));
    w.erase(w.find_last_not_of(' ') + 1);
    if (!allowed.count(w)) p.fail(key, "unknown entry '" + w + "'");
    out.insert(w);
  }
  return out;
}

// Physical homogeneous free flow g(t, w) = G0(t w), t = e^tau.
FlowImage homogeneous_physical(const frozen::VelocityProfile& G0, double tau) {
  return {G0, Mat3::Identity() * std::exp(tau), 1.0, "homogeneous physical"};
}

void frozen_cmd(const Params& p, std::uint64_t, Output& o) {
  const auto G0 = velocity_profile(p);
  const auto todo = words(p, "experiments", {"decay", "energy", "weak", "mass"});
  const double K = p.real("K");

  if (todo.count("decay")) {
    const double tau_max = p.positive("tau_max"), step = p.positive("tau_step");
    const double rel = p.positive("rate_rel");
    std::vector<double> grid;
    for (long i = 0; i * step <= tau_max * (1 + 1e-12); ++i) grid.push_back(i * step);
    std::vector<std::vector<double>> rates, slopes;
    for (double g : p.reals("gammas")) {
      if (!(g > -2 && g <= 0)) p.fail("gammas", "entries must lie in (-2, 0]");
      const auto r = frozen::collision_rate_decay(G0, g, grid, rel);
      for (std::size_t i = 0; i < r.tau.size(); ++i) rates.push_back({g, r.tau[i], r.rate[i]});
      slopes.push_back({g, r.fitted_slope, r.predicted_slope, r.logarithmic ? 1.0 : 0.0, r.tau[r.fit_from]});
      o.log() << "gamma " << csv::fmt(g) << ": slope " << csv::fmt(r.fitted_slope) << " (predicted "
              << csv::fmt(r.predicted_slope) << (r.logarithmic ? ", with a log factor" : "") << ")\n";
    }
    o.table("decay.csv", {"gamma", "tau", "rate"}, rates);
    o.table("slopes.csv", {"gamma", "fitted_slope", "predicted_slope", "logarithmic", "fit_from_tau"}, slopes);
  }

  if (todo.count("energy")) {
    const double lim = frozen::shear_energy_limit(G0);
    std::vector<std::vector<double>> rows;
    for (double t : p.reals("energy_times")) {
      if (!(t >= 1)) p.fail("energy_times", "entries must be >= 1");
      const double r = frozen::shear_energy_ratio(G0, K, t);
      rows.push_back({t, r, lim, std::abs(r / lim - 1)});
    }
    o.table("energy.csv", {"t", "ratio", "limit", "rel_gap"}, rows);
  }

  if (todo.count("weak")) {
    const auto c = p.reals("weak_center");
    if (c.size() != 3) p.fail("weak_center", "expected 3 components");
    const auto f = frozen::TestFunction::bump(Vec3(c[0], c[1], c[2]), p.positive("weak_radius"));
    std::vector<std::vector<double>> rows;
    for (const auto& r : frozen::weak_limit_check(G0, K, p.reals("weak_taus"), {f}))
      rows.push_back({r.tau, r.pairing, r.limit, r.gap, r.rel_gap});
    o.table("weak.csv", {"tau", "pairing", "limit", "gap", "rel_gap"}, rows);
  }

  if (todo.count("mass")) {
    const double m0 = frozen::mass(frozen::identity(G0));
    std::vector<std::vector<double>> rows;
    for (double tau : p.reals("mass_taus")) {
      if (!(tau >= 0)) p.fail("mass_taus", "entries must be >= 0");
      const double ms[3] = {frozen::mass(frozen::homogeneous_free_flow(G0, tau)),
                            frozen::mass(frozen::cylindrical_free_flow(G0, tau)),
                            frozen::mass(frozen::shear_free_flow(G0, K, std::exp(tau)))};
      for (int k = 0; k < 3; ++k) rows.push_back({double(k), tau, ms[k], std::abs(ms[k] / m0 - 1)});
    }
    o.table("mass.csv", {"flow", "tau", "mass", "rel_err"}, rows, {"flow 0 homogeneous, 1 cylindrical, 2 shear at t = e^tau"});
  }
}

void entropy_cmd(const Params& p, std::uint64_t, Output& o) {
  const auto G0 = velocity_profile(p);
  const auto& flow = p.text("flow");
  const double K = p.real("K");
  std::vector<std::vector<double>> rows;
  if (flow != "shear" && flow != "cylindrical" && flow != "homogeneous" && flow != "identity")
    p.fail("flow", "expected shear, cylindrical, homogeneous or identity, got '" + flow + "'");
  auto at = [&](double x) {
    if (flow == "shear") {
      if (!(x >= 1)) p.fail("times", "shear times must be >= 1");
      return frozen::shear_free_flow(G0, K, x);
    }
    if (flow == "cylindrical") return frozen::cylindrical_physical(G0, std::exp(x));
    if (flow == "homogeneous") return homogeneous_physical(G0, x);
    return frozen::identity(G0);
  };
  for (double x : p.reals("times")) {
    const auto g = at(x);
    const auto r = entropy::report(g);
    rows.push_back({x, r.s_per_particle, r.rho, r.eps, r.C_G, r.residual});
  }
  o.table("entropy.csv", {"t_or_tau", "s_per_particle", "rho", "eps", "C_G", "residual"}, rows,
          {"flow " + flow + "; reference C_G " + csv::fmt(entropy::c_g_maxwellian())});
  o.log() << "s/rho from " << csv::fmt(rows.front()[1]) << " to " << csv::fmt(rows.back()[1]) << ", eps from "
          << csv::fmt(rows.front()[3]) << " to " << csv::fmt(rows.back()[3]) << '\n';
}

}  // namespace

std::vector<Command> gas_commands() {
  std::vector<Command> v;
  v.push_back({"frozen",
               "free-flow experiments: collision-rate decay, shear energy, weak limit, mass",
               join(velocity_profile_keys(),
                    std::vector<ParamSpec>{
                        {"experiments", Kind::Text, "decay,energy,weak,mass", "comma list of experiments"},
                        {"K", Kind::Real, "1", "shear rate"},
                        {"gammas", Kind::RealList, "0,-0.5,-1,-1.5", "kernel homogeneities"},
                        {"tau_max", Kind::Real, "12", "last tau of the decay grid"},
                        {"tau_step", Kind::Real, "0.5", "decay grid spacing"},
                        {"rate_rel", Kind::Real, "1e-9", "collision-rate quadrature tolerance"},
                        {"energy_times", Kind::RealList, "1,2,5,10,20,50,100,200", "shear times t >= 1"},
                        {"weak_taus", Kind::RealList, "1,2,3,4,5,6", "weak-limit times"},
                        {"weak_center", Kind::RealList, "-0.3,0.4,0.1", "test bump centre"},
                        {"weak_radius", Kind::Real, "1.5", "test bump radius"},
                        {"mass_taus", Kind::RealList, "0,1,2", "mass check times"},
                    }),
               frozen_cmd});
  v.push_back({"entropy",
               "entropy per particle along a free flow",
               join(velocity_profile_keys(), std::vector<ParamSpec>{
                                                 {"flow", Kind::Text, "shear", "shear, cylindrical, homogeneous or identity"},
                                                 {"times", Kind::RealList, "1,2,5,10", "t for shear, tau otherwise"},
                                                 {"K", Kind::Real, "1", "shear rate"},
                                             }),
               entropy_cmd});
  return v;
}

}  // namespace hdflow::cli
