// classify, moments, wkb
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "commands.hpp"
#include "hdflow/collision_moments.hpp"
#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"
#include "hdflow/flow_kinematics.hpp"
#include "hdflow/wkb.hpp"

namespace hdflow::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void classify(const Params& p, std::uint64_t, Output& o) {
  const auto a = p.reals("A");
  if (a.size() != 9) p.fail("A", "expected 9 entries, row major");
  flow::Mat3 A;
  A << a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8];
  const flow::DeformationMatrix D(A);
  const double t_max = p.positive("t_max");
  if (!D.global() && t_max >= D.horizon())
    p.fail("t_max", "reaches the flow horizon at t = " + csv::fmt(D.horizon()));
  const auto cls = flow::classify_flow(D);

  std::ostringstream rep;
  rep << "case = " << flow::case_name(cls.label) << '\n';
  rep << "horizon = " << csv::fmt(D.horizon()) << '\n';
  rep << "residual = " << csv::fmt(cls.residual) << '\n';
  for (const auto& [k, v] : cls.parameters) rep << k << " = " << csv::fmt(v) << '\n';
  {
    std::ofstream f(o.path("classification.txt"));
    f << rep.str();
    if (!f) throw InvalidArgument("out: cannot write classification.txt");
    o.note_file("classification.txt");
  }
  o.log() << rep.str();

  const double rho0 = p.positive("rho0");
  std::vector<std::vector<double>> rows;
  for (double t : linspace(0, t_max, p.at_least("samples", 2))) {
    const auto L = flow::evolve_L(D, t);
    std::vector<double> r{t, flow::density_evolution(D, rho0, t)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.push_back(L(i, j));
    rows.push_back(std::move(r));
  }
  o.table("flow.csv", {"t", "rho", "L11", "L12", "L13", "L21", "L22", "L23", "L31", "L32", "L33"}, rows,
          {std::string("case ") + flow::case_name(cls.label)});
}

moments::ShearParams shear_params(const Params& p) {
  moments::ShearParams s;
  s.K1 = p.real("K1");
  s.K2 = p.real("K2");
  s.K3 = p.real("K3");
  s.b = p.nonnegative("b");
  return s;
}

std::vector<ParamSpec> shear_keys() {
  return {
      {"K1", Kind::Real, "1", "shear K1"},
      {"K2", Kind::Real, "0", "shear K2"},
      {"K3", Kind::Real, "1", "shear K3"},
      {"b", Kind::Real, "1", "collision constant b"},
  };
}

// Leading WKB coefficient c1 of S ~ c1 t^{5/3} for the moment graph, NaN if
// the graph has no admissible dominant cycle (e.g. K1 K3 = 0).
wkb::CycleReport moment_cycle(const moments::ShearParams& s, bool& ok) {
  try {
    ok = true;
    return wkb::dominant_cycles(wkb::build_graph(wkb::moment_system(s))).front();
  } catch (const InvalidArgument&) {
    ok = false;
    return {};
  }
}

void moments_cmd(const Params& p, std::uint64_t, Output& o) {
  auto s = shear_params(p);
  s.retain_k2 = p.flag("retain_k2");
  const double T = p.positive("T");
  const auto m = p.reals("M0");
  if (m.size() != 6) p.fail("M0", "expected 6 entries 11,12,13,22,23,33");
  moments::Sym3 M0;
  std::copy(m.begin(), m.end(), M0.begin());
  RenormOptions opt;
  opt.record_interval = p.positive("record_interval");
  opt.rel_tol = p.positive("rel_tol");
  // Negative window ends mean T/3 and T.
  double t0 = p.real("fit_t0"), t1 = p.real("fit_t1");
  if (t0 < 0) t0 = T / 3;
  if (t1 < 0) t1 = T;
  if (t1 > T) p.fail("fit_t1", "lies beyond T");
  if (!(t0 < t1)) p.fail("fit_t0", "must be below fit_t1");

  const auto series = moments::integrate_moments(M0, s, T, opt);
  std::vector<std::vector<double>> rows;
  for (const auto& st : series.states) {
    std::vector<double> r{st.t, st.log_scale};
    r.insert(r.end(), st.unit.begin(), st.unit.end());
    r.push_back(std::log(std::abs(st.unit[moments::M11])) - std::log(std::abs(st.unit[moments::M22])));
    rows.push_back(std::move(r));
  }
  o.table("moments.csv", {"t", "S", "U11", "U12", "U13", "U22", "U23", "U33", "log_M11_over_M22"}, rows);

  const auto fit = moments::fit_growth(series, t0, t1);
  bool ok = false;
  const auto cyc = moment_cycle(s, ok);
  const double c1w = ok ? wkb::predict_S(cyc, 1.0) : kNaN;
  const double c2w = wkb::moment_subleading_coefficient(s.b);
  const double expo = ok ? cyc.exponent : kNaN;
  o.table("fit.csv",
          {"c1", "c2", "c3", "residual", "t0", "t1", "points", "c1_wkb", "c2_wkb", "exponent_wkb", "c1_rel_err",
           "c2_rel_err"},
          {{fit.c1, fit.c2, fit.c3, fit.residual, fit.t0, fit.t1, double(fit.points), c1w, c2w, expo,
            std::abs(fit.c1 / c1w - 1), c2w != 0 ? std::abs(fit.c2 / c2w - 1) : kNaN}});
  o.log() << "fit: c1 = " << csv::fmt(fit.c1) << " c2 = " << csv::fmt(fit.c2) << '\n';
  if (ok)
    o.log() << "wkb: c1 = " << csv::fmt(c1w) << " exponent = " << csv::fmt(expo)
            << " rel err c1 = " << csv::fmt(std::abs(fit.c1 / c1w - 1)) << '\n';
  else
    o.log() << "wkb: no dominant cycle for these parameters\n";
  if (!fit.window_heuristic_ok) o.log() << "warning: fit window starts where the t term is still large\n";

  if (s.K1 * s.K3 != 0 && s.b > 0) {
    std::vector<std::vector<double>> rr;
    for (const auto& r : moments::moment_ratio_diagnostics(series, s.K1, s.K3, s.b))
      rr.push_back({r.t, r.r13_11, r.p13_11, r.r33_13, r.p33_13, r.r11_33, r.p11_33, r.r22_11, r.p22_11});
    o.table("ratios.csv", {"t", "r13_11", "p13_11", "r33_13", "p33_13", "r11_33", "p11_33", "r22_11", "p22_11"}, rr);
  }
}

void wkb_cmd(const Params& p, std::uint64_t, Output& o) {
  const auto& src = p.text("system");
  wkb::SystemDescription sys;
  if (src == "moments") {
    sys = wkb::moment_system(shear_params(p));
  } else {
    std::ifstream f(src);
    if (!f) p.fail("system", "cannot open '" + src + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    sys = wkb::parse_system(ss.str());
  }
  const auto cap = p.at_least("cycle_cap", 1);
  const auto g = wkb::build_graph(sys);
  const auto winners = wkb::dominant_cycles(g, static_cast<std::size_t>(cap));
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < winners.size(); ++i) {
    const auto& r = winners[i];
    rows.push_back({double(i + 1), double(r.L), double(r.T), r.C0, r.omega.real(), r.omega.imag(), r.exponent,
                    r.amplitude});
    std::string path = "rank " + std::to_string(i + 1) + ":";
    for (const auto& n : r.names) path += " " + n;
    notes.push_back(path);
    o.log() << path << "  exponent " << csv::fmt(r.exponent) << "  amplitude " << csv::fmt(r.amplitude) << '\n';
  }
  o.table("cycles.csv", {"rank", "L", "T", "C0", "omega_re", "omega_im", "exponent", "amplitude"}, rows, notes);

  std::vector<std::vector<double>> pred;
  const double t_max = p.positive("t_max");
  for (double t : linspace(t_max / double(p.at_least("points", 2)), t_max, p.integer("points")))
    pred.push_back({t, wkb::predict_S(winners.front(), t)});
  o.table("prediction.csv", {"t", "S"}, pred);
}

}  // namespace

std::vector<Command> flow_commands() {
  std::vector<Command> v;
  v.push_back({"classify",
               "classify an affine flow L = (I + tA)^{-1} A",
               {{"A", Kind::RealList, "1,0,0,0,1,0,0,0,1", "deformation matrix, 9 entries row major"},
                {"t_max", Kind::Real, "10", "last sample time"},
                {"samples", Kind::Integer, "21", "number of sample times"},
                {"rho0", Kind::Real, "1", "initial density"}},
               classify});
  v.push_back({"moments",
               "second moments under combined shear, with growth fit and WKB comparison",
               join(shear_keys(), std::vector<ParamSpec>{
                                      {"T", Kind::Real, "150", "final time"},
                                      {"M0", Kind::RealList, "1,0,0,1,0,1", "initial moments 11,12,13,22,23,33"},
                                      {"fit_t0", Kind::Real, "-1", "fit window start, negative for T/3"},
                                      {"fit_t1", Kind::Real, "-1", "fit window end, negative for T"},
                                      {"record_interval", Kind::Real, "0.5", "output spacing"},
                                      {"rel_tol", Kind::Real, "1e-9", "ODE relative tolerance"},
                                      {"retain_k2", Kind::Bool, "true", "keep the K2 coupling"},
                                  }),
               moments_cmd});
  v.push_back({"wkb",
               "dominant cycles of a thin/thick coupling graph",
               join(shear_keys(), std::vector<ParamSpec>{
                                      {"system", Kind::Path, "moments", "coupling file, or 'moments' for the shear moment system"},
                                      {"t_max", Kind::Real, "100", "last time of the S(t) prediction"},
                                      {"points", Kind::Integer, "100", "samples of the prediction"},
                                      {"cycle_cap", Kind::Integer, "10000", "abort past this many cycles"},
                                  }),
               wkb_cmd});
  return v;
}

}  // namespace hdflow::cli
