// toy-det, toy-sc, toy-mc, dispersion
#include <algorithm>
#include <cmath>
#include <numbers>

#include "commands.hpp"
#include "hdflow/csv.hpp"
#include "hdflow/dispersion.hpp"
#include "hdflow/errors.hpp"
#include "hdflow/toy_model.hpp"
#include "hdflow/toy_model_mc.hpp"

namespace hdflow::cli {

namespace {

// Keeps the CLI from allocating its way into swap; about 5 GB of state.
constexpr long long kMaxParticles = 200'000'000;

toy::UniformGrid grid(const Params& p, const std::string& lo, const std::string& hi, const std::string& n) {
  const double a = p.real(lo), b = p.real(hi);
  if (!(b > a)) p.fail(hi, "must exceed " + lo);
  return {a, b, static_cast<int>(p.at_least(n, 2))};
}

void toy_det(const Params& p, std::uint64_t, Output& o) {
  const auto profile = toy_profile(p);
  const auto& rate_kind = p.text("rate");
  const double beta = p.nonnegative("beta");
  const double T = p.positive("T");
  const auto N = p.at_least("N", 2);
  const double fit_from = p.in_open("fit_from", 0, 1);
  toy::RateFn rate;
  toy::ToyMomentSeries s;
  if (rate_kind == "constant") {
    const double eps = p.nonnegative("epsilon");
    rate = [eps](double) { return eps; };
    s = toy::solve_lambda_volterra(beta, rate, profile, T, static_cast<int>(N));
    const double fitted = toy::log_slope(s, fit_from * T, T);
    const double z0 = eps > 0 && beta > 0 ? dispersion::solve_root(eps, 0, beta).z0.real() : 0.0;
    o.table("growth.csv", {"beta", "epsilon", "fitted_rate", "z0", "rel_err"},
            {{beta, eps, fitted, z0, std::abs(fitted / z0 - 1)}});
    o.log() << "growth rate " << csv::fmt(fitted) << " vs root " << csv::fmt(z0) << '\n';
  } else if (rate_kind == "adiabatic") {
    const double A = p.nonnegative("A");
    if (beta == 1.0) p.fail("beta", "beta = 1 has no adiabatic formula");
    rate = [A](double t) { return A / (1 + t); };
    auto r = toy::adiabatic_check(beta, A, T, static_cast<int>(N), profile);
    o.table("adiabatic.csv", {"beta", "A", "T", "predicted_exponent", "fitted_exponent", "ratio"},
            {{beta, A, T, r.predicted_exponent, r.fitted_exponent, r.ratio}});
    o.log() << "exponent " << csv::fmt(r.fitted_exponent) << " vs " << csv::fmt(r.predicted_exponent) << ", ratio "
            << csv::fmt(r.ratio) << '\n';
    s = std::move(r.series);
  } else {
    p.fail("rate", "expected constant or adiabatic, got '" + rate_kind + "'");
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.times.size(); ++i) rows.push_back({s.times[i], s.lambda[i], s.log_lambda[i], s.epsilon[i]});
  o.table("lambda.csv", {"t", "lambda", "log_lambda", "epsilon"}, rows);

  if (!p.flag("field")) return;
  const toy::UniformGrid tg{0.0, T, static_cast<int>(p.at_least("nt", 2))};
  if (N % (tg.n - 1) != 0) p.fail("nt", "nt - 1 must divide N so the field and Volterra grids share times");
  const auto field = toy::solve_field(profile, rate, grid(p, "X_lo", "X_hi", "nX"), tg);
  const auto stride = N / (tg.n - 1);
  std::vector<std::vector<double>> fr;
  for (std::size_t i = 0; i < field.t.size(); ++i) {
    const double lf = field.lambda(beta, i), lv = s.lambda[i * stride];
    fr.push_back({field.t[i], lf, lv, std::abs(lf / lv - 1),
                  toy::reconstruct_total_moment(field, profile, rate, beta, field.t[i])});
  }
  o.table("field_moments.csv", {"t", "lambda_field", "lambda_volterra", "rel_err", "total_moment"}, fr);
}

void toy_sc(const Params& p, std::uint64_t, Output& o) {
  const auto profile = toy_profile(p);
  const double a = p.in_open("a", 0, 1);
  const double T = p.positive("T");
  const double dt = p.positive("dt");
  const double n = std::round(T / dt);
  if (!(n >= 2 && n < 2e8)) p.fail("dt", "gives an unusable step count");
  const auto r = toy::solve_selfconsistent(a, profile, T, static_cast<int>(n));
  const auto& s = r.lambda;
  const std::size_t last = s.times.size() - 1;
  const std::size_t stride = std::max<std::size_t>(1, last / static_cast<std::size_t>(p.at_least("rows", 1)));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i <= last; i += stride)
    rows.push_back({s.times[i], s.epsilon[i], r.t_eps[i], s.log_lambda[i], r.log_E[i]});
  if (last % stride != 0) rows.push_back({s.times[last], s.epsilon[last], r.t_eps[last], s.log_lambda[last], r.log_E[last]});
  o.table("selfconsistent.csv", {"t", "epsilon", "t_eps", "log_lambda", "log_E"}, rows);
  const double slope = toy::loglog_slope(s, T / 10, T);
  o.table("trace.csv", {"a", "T", "t_eps_final", "target", "loglog_slope", "predicted_slope"},
          {{a, T, r.t_eps[last], 1 - a, slope, -(1 + a)}});
  o.log() << "t eps(T) = " << csv::fmt(r.t_eps[last]) << " (target " << csv::fmt(1 - a) << "), lambda slope "
          << csv::fmt(slope) << '\n';
}

void toy_mc(const Params& p, std::uint64_t seed, Output& o) {
  const auto profile = toy_profile(p);
  const auto n = p.at_least("n", 1);
  if (n > kMaxParticles) throw ResourceLimit("n: at most " + std::to_string(kMaxParticles) + " particles");
  const auto& kind = p.text("mode");
  mc::Mode mode;
  if (kind == "constant")
    mode = mc::Mode::constant(p.nonnegative("epsilon"));
  else if (kind == "selfconsistent")
    mode = mc::Mode::self_consistent(p.in_open("a", 0, 1));
  else
    p.fail("mode", "expected constant or selfconsistent, got '" + kind + "'");
  const double T = p.nonnegative("T");
  const auto k = p.at_least("records", 1);
  std::vector<double> times;
  const auto& spacing = p.text("spacing");
  if (spacing == "linear") {
    times = linspace(0, T, k);
  } else if (spacing == "log") {
    if (!(T > 0)) p.fail("T", "log spacing needs T > 0");
    for (double e : linspace(-3, 0, k)) times.push_back(e == 0 ? T : T * std::pow(10.0, e));
  } else {
    p.fail("spacing", "expected linear or log, got '" + spacing + "'");
  }
  if (mode.kind == mc::Mode::Kind::SelfConsistent &&
      std::count_if(times.begin(), times.end(), [T](double t) { return t >= T / 10; }) < 3)
    p.fail("records", "self-consistent runs need at least 3 record times in [T/10, T]");
  mc::SimOptions opt;
  opt.betas = p.reals("betas");
  const auto threads = p.integer("threads");
  if (threads < 0) p.fail("threads", "must be >= 0");
  opt.threads = static_cast<int>(threads);
  opt.sync_fraction = p.positive("sync_fraction");
  opt.sync_floor = p.positive("sync_floor");
  opt.event_log = p.flag("events");
  const auto tr = mc::simulate(static_cast<std::size_t>(n), profile, mode, T, seed, times, opt);
  mc::write_summary(o.path("summary.csv"), tr);
  o.note_file("summary.csv");
  if (opt.event_log) {
    mc::write_events(o.path("events.csv"), tr);
    o.note_file("events.csv");
  }
  if (mode.kind == mc::Mode::Kind::SelfConsistent) {
    const auto tc = mc::epsilon_trace_check(tr, mode.a);
    o.table("trace.csv", {"a", "fitted", "target", "se", "points"},
            {{tc.a, tc.fitted, tc.target, tc.se, double(tc.points)}});
    o.log() << "mean t eps over the last decade " << csv::fmt(tc.fitted) << " +- " << csv::fmt(tc.se) << '\n';
  }
  const auto& last = tr.records.back();
  o.log() << "t = " << csv::fmt(last.t) << ": " << last.collisions << " collisions, mass " << csv::fmt(last.mass) << '\n';
}

// Phi(t, X) e^{beta X} against the Gaussian front, both with unit integral in xi.
std::vector<std::vector<double>> front_slice(const toy::ToyField& F, const dispersion::FrontCoefficients& c, double beta,
                                             std::size_t i) {
  const double t = F.t[i], w = std::sqrt(c.A2 * t);
  std::vector<double> logy(F.X.size(), -INFINITY);
  for (std::size_t j = 0; j < F.X.size(); ++j)
    if (F.unit[i][j] > 0) logy[j] = std::log(F.unit[i][j]) + beta * F.X[j];
  const double top = *std::max_element(logy.begin(), logy.end());
  std::vector<double> y(F.X.size());
  double area = 0;
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::exp(logy[j] - top);
  for (std::size_t j = 1; j < y.size(); ++j) area += 0.5 * (y[j] + y[j - 1]) * F.dX() / w;
  std::vector<std::vector<double>> rows;
  const double qn = 1 / std::sqrt(4 * std::numbers::pi);
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double xi = (F.X[j] + c.A1 * t) / w;
    rows.push_back({xi, y[j] / area, qn * std::exp(-0.25 * xi * xi)});
  }
  return rows;
}

void dispersion_cmd(const Params& p, std::uint64_t, Output& o) {
  const double beta = p.positive("beta");
  const auto eps = p.reals("epsilons");
  const auto ks = p.reals("ks");
  for (double e : eps)
    if (!(e > 0 && std::isfinite(e))) p.fail("epsilons", "entries must be positive");
  const auto profile = toy_profile(p);
  std::vector<std::vector<double>> roots, coeffs;
  for (double e : eps) {
    const double asym = std::pow(std::tgamma(beta) * e, 1 / beta);
    for (double k : ks) {
      const auto r = dispersion::solve_root(e, k, beta);
      roots.push_back({e, beta, k, r.z0.real(), r.z0.imag(), r.residual, asym, r.z0.real() / asym});
    }
    const auto c = dispersion::front_coefficients(e, beta);
    const auto g = dispersion::predicted_moment_growth(e, beta, profile);
    coeffs.push_back({e, beta, c.z0, c.A1, c.A2, c.B_eps, g.amplitude, g.amplitude_asymptotic});
  }
  o.table("roots.csv", {"epsilon", "beta", "k", "z0_re", "z0_im", "residual", "z0_asymptotic", "ratio"}, roots);
  o.table("coefficients.csv", {"epsilon", "beta", "z0", "A1", "A2", "B_eps", "amplitude", "amplitude_asymptotic"},
          coeffs);

  if (!p.flag("front")) return;
  const double fe = p.positive("front_epsilon");
  const double ft = p.positive("front_t");
  const toy::UniformGrid tg{0.0, p.positive("front_T"), static_cast<int>(p.at_least("nt", 2))};
  const auto field = toy::solve_field(profile, [fe](double) { return fe; }, grid(p, "X_lo", "X_hi", "nX"), tg);
  const auto c = dispersion::front_coefficients(fe, beta);
  const auto rep = dispersion::front_profile_check(field, c, beta, ft);
  std::size_t i = 0;
  while (i + 1 < field.t.size() && std::abs(field.t[i] - ft) > 1e-9 * std::max(1.0, ft)) ++i;
  o.table("front.csv", {"xi", "profile", "gaussian"}, front_slice(field, c, beta, i));
  const double drift = dispersion::front_drift(field, beta, ft / 2, ft);
  o.table("front_summary.csv",
          {"t", "sup_distance", "argmax_X", "predicted_center", "width", "drift", "predicted_drift"},
          {{rep.t, rep.sup_distance, rep.argmax_X, rep.predicted_center, rep.width, drift, -c.A1}});
  o.log() << "front at t = " << csv::fmt(ft) << ": sup distance " << csv::fmt(rep.sup_distance) << '\n';
}

}  // namespace

std::vector<Command> toy_commands() {
  std::vector<Command> v;
  v.push_back({"toy-det",
               "deterministic toy model: Volterra moments, optional field solve",
               join(toy_profile_keys(), std::vector<ParamSpec>{
                                            {"rate", Kind::Text, "constant", "constant or adiabatic (A/(1+t))"},
                                            {"epsilon", Kind::Real, "0.05", "constant collision rate"},
                                            {"A", Kind::Real, "1", "adiabatic amplitude"},
                                            {"beta", Kind::Real, "2", "moment order"},
                                            {"T", Kind::Real, "40", "final time"},
                                            {"N", Kind::Integer, "4000", "Volterra steps"},
                                            {"fit_from", Kind::Real, "0.5", "growth fit over [fit_from T, T]"},
                                            {"field", Kind::Bool, "false", "also solve the field equation"},
                                            {"nt", Kind::Integer, "801", "field time points"},
                                            {"X_lo", Kind::Real, "-4", "field X grid start"},
                                            {"X_hi", Kind::Real, "90", "field X grid end"},
                                            {"nX", Kind::Integer, "4701", "field X points"},
                                        }),
               toy_det});
  v.push_back({"toy-sc",
               "self-consistent toy model, eps = int f (rho zeta)^{-a}",
               join(toy_profile_keys(), std::vector<ParamSpec>{
                                            {"a", Kind::Real, "0.5", "rate exponent in (0, 1)"},
                                            {"T", Kind::Real, "1e4", "final time"},
                                            {"dt", Kind::Real, "0.1", "time step"},
                                            {"rows", Kind::Integer, "2000", "approximate number of output rows"},
                                        }),
               toy_sc});
  v.push_back({"toy-mc",
               "particle Monte Carlo of the toy model",
               join(toy_profile_keys(), std::vector<ParamSpec>{
                                            {"n", Kind::Integer, "1e5", "particles"},
                                            {"mode", Kind::Text, "constant", "constant or selfconsistent"},
                                            {"epsilon", Kind::Real, "0.05", "constant collision rate"},
                                            {"a", Kind::Real, "0.5", "self-consistent exponent"},
                                            {"T", Kind::Real, "40", "final time"},
                                            {"records", Kind::Integer, "9", "record times"},
                                            {"spacing", Kind::Text, "linear", "linear on [0, T] or log on [T/1000, T]"},
                                            {"betas", Kind::RealList, "1", "orders of E[(rho zeta)^beta]"},
                                            {"threads", Kind::Integer, "0", "0 reads HDFLOW_THREADS"},
                                            {"sync_fraction", Kind::Real, "0.01", "rate refresh, fraction of t"},
                                            {"sync_floor", Kind::Real, "0.01", "rate refresh, minimum interval"},
                                            {"events", Kind::Bool, "false", "write the collision log"},
                                        }),
               toy_mc});
  v.push_back({"dispersion",
               "roots of 1 = eps Lambda(z, k), front coefficients, optional front check",
               join(toy_profile_keys(), std::vector<ParamSpec>{
                                            {"beta", Kind::Real, "2", "moment order"},
                                            {"epsilons", Kind::RealList, "1e-1,1e-2,1e-3,1e-4,1e-5", "rates"},
                                            {"ks", Kind::RealList, "0,0.05,0.1,0.5", "wave numbers"},
                                            {"front", Kind::Bool, "false", "solve a field and compare the front"},
                                            {"front_epsilon", Kind::Real, "0.05", "rate of the front run"},
                                            {"front_t", Kind::Real, "200", "time of the front slice"},
                                            {"front_T", Kind::Real, "200", "field final time"},
                                            {"nt", Kind::Integer, "801", "field time points"},
                                            {"X_lo", Kind::Real, "-4", "field X grid start"},
                                            {"X_hi", Kind::Real, "90", "field X grid end"},
                                            {"nX", Kind::Integer, "471", "field X points"},
                                        }),
               dispersion_cmd});
  return v;
}

}  // namespace hdflow::cli
