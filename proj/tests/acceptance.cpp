// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is 0 once every criterion has been evaluated, whatever the
// verdicts; --strict makes it the number of failed criteria instead.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hdflow/collision_moments.hpp"
#include "hdflow/dispersion.hpp"
#include "hdflow/entropy.hpp"
#include "hdflow/frozen_flows.hpp"
#include "hdflow/renorm_ode.hpp"
#include "hdflow/toy_model.hpp"
#include "hdflow/toy_model_mc.hpp"
#include "hdflow/wkb.hpp"

using namespace hdflow;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool ok = true;
  std::string detail;
};

// Collects formatted measurements; a failed check marks its entry with [x].
class Ledger {
 public:
  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
  Verdict done() { return {ok_, text_}; }

 private:
  bool ok_ = true;
  std::string text_;
};

void Ledger::check(bool ok, const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  if (!text_.empty()) text_ += "; ";
  text_ += buf;
  if (!ok) {
    text_ += " [x]";
    ok_ = false;
  }
}

double rel(double a, double b) { return std::abs(a / b - 1); }

toy::RateFn constant(double eps) {
  return [eps](double) { return eps; };
}

Verdict collision_constant() {
  constexpr double tol = 1e-12;
  Ledger L;
  const double b1 = moments::collision_b({[](double) { return 1.0; }, 0.0});
  const double b2 = moments::collision_b({[](double x) { return x * x; }, 0.0});
  L.check(rel(b1, 4 * kPi / 5) <= tol, "b(1) rel err %.1e", rel(b1, 4 * kPi / 5));
  L.check(rel(b2, 12 * kPi / 35) <= tol, "b(x^2) rel err %.1e", rel(b2, 12 * kPi / 35));
  return L.done();
}

Verdict moment_growth() {
  constexpr double c1_tol = 0.05, c2_tol = 0.20, scaling_tol = 0.05;
  const moments::Sym3 I{1, 0, 0, 1, 0, 1};
  Ledger L;
  double c1_ref = 0;
  for (double b : {1.0, 0.5, 2.0}) {
    const auto s = moments::integrate_moments(I, {1, 0, 1, b, true}, 150.0);
    const auto g = moments::fit_growth(s, 50, 150);
    if (b == 1.0) {
      c1_ref = g.c1;
      L.check(rel(g.c1, moments::predicted_c1(1, 1, 1)) <= c1_tol, "c1 %.5f vs %.5f", g.c1,
              moments::predicted_c1(1, 1, 1));
      L.check(rel(g.c2, moments::predicted_c2(1)) <= c2_tol, "c2 %.4f vs %.4f", g.c2, moments::predicted_c2(1));
    } else {
      const double r = g.c1 / c1_ref;
      L.check(rel(r, std::cbrt(b)) <= scaling_tol, "c1(%g)/c1(1) %.4f vs %.4f", b, r, std::cbrt(b));
    }
  }
  return L.done();
}

Verdict wkb_engine() {
  constexpr double amp_tol = 1e-12, slope_tol = 0.02;
  Ledger L;
  moments::ShearParams p;
  p.K1 = p.K3 = p.b = 1;
  const auto w = wkb::dominant_cycles(wkb::build_graph(wkb::moment_system(p)));
  const double amp = 0.6 * std::cbrt(4.0 / 3);
  const bool one = w.size() == 1;
  L.check(one && w[0].L == 3 && w[0].T == 2, "(L,T) = (%d,%d)", one ? w[0].L : -1, one ? w[0].T : -1);
  L.check(one && rel(w[0].exponent, 5.0 / 3) <= amp_tol, "exponent %.15g", one ? w[0].exponent : NAN);
  L.check(one && rel(w[0].amplitude, amp) <= amp_tol, "amplitude rel err %.1e", one ? rel(w[0].amplitude, amp) : NAN);

  const auto a = wkb::dominant_cycles(wkb::build_graph(wkb::parse_system("X Y 1 thick\nY X 1\n")));
  const double predicted = a.at(0).exponent;
  RenormOptions opt;
  opt.record_interval = 1.0;
  const auto s = integrate_renormalized(
      [](const std::vector<double>& x, std::vector<double>& d, double t) {
        d[0] = t * x[1];
        d[1] = x[0];
      },
      {1.0, 0.0}, 0.0, 400.0, opt);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& q : s) {
    if (q.t < 50) continue;
    const double S = q.log_scale + std::log(std::max(std::abs(q.unit[0]), std::abs(q.unit[1])));
    const double x = std::log(q.t), y = std::log(S);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  L.check(predicted == 1.5 && rel(slope, predicted) <= slope_tol, "loop exponent %.4g vs integrated %.4f", predicted,
          slope);
  return L.done();
}

Verdict dispersion_roots() {
  constexpr double exact_tol = 1e-13, residual_tol = 1e-10;
  constexpr double window_lo = 0.97, window_hi = 1.0;
  Ledger L;
  double worst_residual = 0, worst_beta1 = 0;
  bool below = true, monotone = true;
  double prev = INFINITY, ratio = NAN;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    const auto r1 = dispersion::solve_root(eps, 0, 1.0);
    worst_beta1 = std::max(worst_beta1, rel(r1.z0.real(), eps) + std::abs(r1.z0.imag()));
    const auto r2 = dispersion::solve_root(eps, 0, 2.0);
    ratio = r2.z0.real() / std::sqrt(std::tgamma(2.0) * eps);
    monotone = monotone && std::abs(ratio - 1) < prev;
    prev = std::abs(ratio - 1);
    worst_residual = std::max({worst_residual, r1.residual, r2.residual});
    for (double k : {0.05, 0.1, 0.5}) {
      const auto rk = dispersion::solve_root(eps, k, 2.0);
      below = below && rk.z0.real() < r2.z0.real();
      worst_residual = std::max(worst_residual, rk.residual);
    }
  }
  L.check(worst_beta1 <= exact_tol, "beta=1 root vs eps %.1e", worst_beta1);
  L.check(monotone, "beta=2 ratio monotone");
  L.check(ratio >= window_lo && ratio <= window_hi, "final ratio %.5f in [%.2f, %.2f]", ratio, window_lo, window_hi);
  L.check(below, "Re z0(k) < z0(0)");
  L.check(worst_residual < residual_tol, "max residual %.1e", worst_residual);
  return L.done();
}

Verdict toy_cross_oracle() {
  constexpr double rate_tol = 0.02, field_tol = 0.01, se_mult = 3.0;
  constexpr double eps = 0.05, beta = 2.0, T = 40;
  Ledger L;
  const auto p = toy::InitialProfile::gaussian(0, 1).with_mass(1.0);
  const auto rate = constant(eps);

  const auto s = toy::solve_lambda_volterra(beta, rate, p, T, 4000);
  const double fitted = toy::log_slope(s, T / 2, T);
  const double z0 = dispersion::solve_root(eps, 0, beta).z0.real();
  L.check(rel(fitted, z0) <= rate_tol, "rate %.6f vs z0 %.6f", fitted, z0);

  const auto field = toy::solve_field(p, rate, {-4, 90, 4701}, {0, T, 801});
  double worst = 0;
  for (std::size_t i = 0; i < field.t.size(); ++i) worst = std::max(worst, rel(field.lambda(beta, i), s.lambda[5 * i]));
  L.check(worst <= field_tol, "field/Volterra max gap %.2e", worst);

  mc::SimOptions o;
  o.betas = {1.0};  // E[rho zeta] is the order-2 total moment
  const auto tr = mc::simulate(1'000'000, p, mc::Mode::constant(eps), T, 1, {8, 16, 24, 32, 40}, o);
  double worst_z = 0;
  for (const auto& r : tr.records) {
    const double det = toy::reconstruct_total_moment(field, p, rate, beta, r.t);
    worst_z = std::max(worst_z, std::abs(r.moments[0].estimate - det) / r.moments[0].se);
  }
  L.check(worst_z < se_mult, "MC vs field max |z| %.2f over %zu times", worst_z, tr.records.size());
  return L.done();
}

Verdict self_consistent() {
  constexpr double T = 1e4, slope_tol = 0.1, mc_tol = 0.07;
  constexpr int N = 100000;
  Ledger L;
  const auto p = toy::InitialProfile::gaussian(0, 0.5).with_mass(1.0);
  for (double a : {0.2, 0.5, 0.8}) {
    const auto r = toy::solve_selfconsistent(a, p, T, N);
    const double te = r.t_eps.back(), tol = 0.05 * (1 - a) + 0.02;
    L.check(std::abs(te - (1 - a)) < tol, "a=%.1f t*eps %.4f vs %.2f+-%.3f", a, te, 1 - a, tol);
    const double slope = toy::loglog_slope(r.lambda, T / 10, T);
    L.check(std::abs(slope + 1 + a) <= slope_tol, "slope %.3f vs %.1f", slope, -(1 + a));
  }
  std::vector<double> rec{1, 10, 100, 1000};
  for (int k = 2; k <= 10; ++k) rec.push_back(1000.0 * k);
  const auto tr = mc::simulate(1'000'000, p, mc::Mode::self_consistent(0.5), T, 1, rec);
  const auto& last = tr.records.back();
  const double te = last.t * last.epsilon;
  L.check(std::abs(te - 0.5) <= mc_tol, "MC a=0.5 t*eps %.4f vs 0.5+-%.2f", te, mc_tol);
  return L.done();
}

Verdict adiabatic() {
  constexpr double tol = 0.1;
  Ledger L;
  const auto p = toy::InitialProfile::gaussian(0, 0.5).with_mass(1.0);
  const auto hi = toy::adiabatic_check(2.0, 1.0, 1e4, 20000, p);
  L.check(std::abs(hi.ratio - 1) <= tol, "beta=2 ratio %.4f", hi.ratio);
  const auto lo = toy::adiabatic_check(0.5, 1.0, 2000.0, 8000, p);
  L.check(std::abs(lo.fitted_exponent + 1.5) <= tol, "beta=0.5 exponent %.4f vs -1.5", lo.fitted_exponent);
  return L.done();
}

Verdict frozen_decay() {
  constexpr double tol = 0.05;
  Ledger L;
  const auto M = frozen::VelocityProfile::maxwellian(1, 1);
  std::vector<double> grid;
  for (int i = 0; i <= 24; ++i) grid.push_back(0.5 * i);
  for (auto [g, want] : {std::pair{0.0, -1.0}, {-0.5, -1.0}, {-1.5, -0.5}}) {
    const double s = frozen::collision_rate_decay(M, g, grid).fitted_slope;
    L.check(std::abs(s - want) <= tol, "gamma=%g slope %.4f vs %g", g, s, want);
  }
  const auto a = frozen::collision_rate_decay(M, -0.9, grid);
  const auto b = frozen::collision_rate_decay(M, -1.0, grid);
  const auto c = frozen::collision_rate_decay(M, -1.1, grid);
  L.check(b.logarithmic && a.fitted_slope < b.fitted_slope && b.fitted_slope < c.fitted_slope,
          "bracket %.3f < %.3f < %.3f", a.fitted_slope, b.fitted_slope, c.fitted_slope);
  return L.done();
}

Verdict free_flow_invariants() {
  constexpr double mass_tol = 1e-8, energy_tol = 0.01, weak_tol = 0.01;
  Ledger L;
  frozen::Mat3 C;
  C << 1.0, 0.3, 0.1, 0.3, 0.7, 0.0, 0.1, 0.0, 1.2;
  const auto G0 = frozen::VelocityProfile::gaussian(C, frozen::Vec3(0.2, -0.1, 0.3), 2.0);
  double worst = 0;
  for (double tau : {0.0, 1.0, 2.0}) {
    worst = std::max(worst, rel(frozen::mass(frozen::homogeneous_free_flow(G0, tau)), 2.0));
    worst = std::max(worst, rel(frozen::mass(frozen::cylindrical_free_flow(G0, tau)), 2.0));
  }
  for (double t : {1.0, 5.0, 20.0, 50.0}) worst = std::max(worst, rel(frozen::mass(frozen::shear_free_flow(G0, 1.0, t)), 2.0));
  L.check(worst <= mass_tol, "mass max rel err %.1e", worst);

  const auto M = frozen::VelocityProfile::maxwellian(1, 1);
  const double gap = rel(frozen::shear_energy_ratio(M, 1.0, 50.0), frozen::shear_energy_limit(M));
  L.check(gap <= energy_tol, "energy gap at t=50 %.4f", gap);

  const auto rows = frozen::weak_limit_check(frozen::VelocityProfile::gaussian(C), 1.0, {1, 2, 3, 4, 5, 6},
                                             {frozen::TestFunction::bump(frozen::Vec3(-0.3, 0.4, 0.1), 1.5)});
  bool decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].gap < rows[i - 1].gap;
  L.check(decreasing && rows.back().rel_gap < weak_tol, "weak gap decreasing to %.1e", rows.back().rel_gap);
  return L.done();
}

Verdict entropy_checks() {
  constexpr double cg_tol = 1e-8, residual_tol = 1e-6, drift_tol = 1e-6;
  Ledger L;
  const double cg = 1.5 * (1 + std::log(kPi) - std::log(1.5));
  const double measured = entropy::c_g(frozen::VelocityProfile::maxwellian(1, 1));
  L.check(std::abs(measured - cg) <= cg_tol, "C_G err %.1e", std::abs(measured - cg));

  double worst = 0;
  for (auto [rho, theta] : {std::pair{1.0, 1.0}, {2.5, 0.4}, {0.3, 3.0}})
    worst = std::max(worst, std::abs(entropy::ideal_form_residual(
                                frozen::identity(frozen::VelocityProfile::maxwellian(rho, theta)), rho)));
  L.check(worst <= residual_tol, "max ideal-form residual %.1e", worst);

  frozen::Mat3 S;
  S << 0.6, 0.1, 0.0, 0.1, 0.5, 0.0, 0.0, 0.0, 0.4;
  const auto G = frozen::VelocityProfile::gaussian(S);
  const auto r1 = entropy::report(frozen::shear_free_flow(G, 1.0, 1.0));
  double shear_drift = 0, prev_eps = r1.eps;
  bool grows = true;
  for (double t : {2.0, 5.0, 10.0}) {
    const auto r = entropy::report(frozen::shear_free_flow(G, 1.0, t));
    shear_drift = std::max(shear_drift, std::abs(r.s_per_particle - r1.s_per_particle));
    grows = grows && r.eps > prev_eps;
    prev_eps = r.eps;
  }
  L.check(shear_drift <= drift_tol && grows, "shear s/rho drift %.1e, eps %.3g -> %.3g", shear_drift, r1.eps, prev_eps);

  const auto Gc = frozen::VelocityProfile::gaussian(frozen::Vec3(0.7, 0.5, 0.9).asDiagonal());
  const double s0 = entropy::report(frozen::cylindrical_physical(Gc, 1.0)).s_per_particle;
  double cyl_drift = 0;
  for (double tau : {1.0, 2.0})
    cyl_drift = std::max(cyl_drift,
                         std::abs(entropy::report(frozen::cylindrical_physical(Gc, std::exp(tau))).s_per_particle - s0));
  L.check(cyl_drift <= drift_tol, "cylindrical s/rho drift %.1e", cyl_drift);
  return L.done();
}

Verdict non_self_similarity() {
  Ledger L;
  double prev = -INFINITY;
  bool increasing = true;
  std::string rates;
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto s = toy::solve_lambda_volterra(beta, constant(0.05), 1.0, 1500.0, 15000);
    const double r = toy::log_slope(s, 750, 1500);
    increasing = increasing && r > prev;
    prev = r;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.4f", rates.empty() ? "" : " < ", r);
    rates += buf;
  }
  L.check(increasing, "lambda rates %s", rates.c_str());

  const auto m = moments::integrate_moments({1, 0, 0, 1, 0, 1}, {1, 0, 1, 1, true}, 150.0);
  double last = 0, first = NAN;
  bool monotone = true;
  for (const auto& st : m.states) {
    if (st.t <= 50) continue;
    const double r = st.unit[moments::M11] / st.unit[moments::M22];
    if (std::isnan(first)) first = r;
    monotone = monotone && r > last;
    last = r;
  }
  L.check(monotone, "M11/M22 %.3g -> %.3g on (50, 150]", first, last);
  return L.done();
}

Verdict determinism() {
  Ledger L;
  const auto p = toy::InitialProfile::gaussian(0, 0.5).with_mass(1.0);
  auto summary = [&](const mc::Mode& mode, double T, int threads) {
    mc::SimOptions o;
    o.betas = {0.5, 1.0};
    o.threads = threads;
    std::ostringstream os;
    mc::write_summary(os, mc::simulate(100000, p, mode, T, 7, {1, T / 4, T / 2, T}, o));
    return os.str();
  };
  for (const auto& [mode, T, name] : {std::tuple{mc::Mode::constant(0.2), 20.0, "constant"},
                                      std::tuple{mc::Mode::self_consistent(0.5), 200.0, "self-consistent"}}) {
    const auto ref = summary(mode, T, 1);
    const bool same = summary(mode, T, 1) == ref && summary(mode, T, 4) == ref;
    L.check(same, "%s: threads 1,1,4 identical", name);
  }
  return L.done();
}

struct Criterion {
  const char* name;
  Verdict (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const Criterion all[] = {
      {"collision constant", collision_constant},   {"moment growth", moment_growth},
      {"WKB engine", wkb_engine},                   {"dispersion roots", dispersion_roots},
      {"toy cross-oracle", toy_cross_oracle},       {"self-consistent rate", self_consistent},
      {"adiabatic regimes", adiabatic},             {"frozen decay exponents", frozen_decay},
      {"free-flow invariants", free_flow_invariants}, {"entropy", entropy_checks},
      {"non-self-similarity", non_self_similarity}, {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& c : all) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.ok;
    std::printf("%s %2d %-24s %s (%.1fs)\n", v.ok ? "PASS" : "FAIL", index, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return strict ? failed : 0;
}
