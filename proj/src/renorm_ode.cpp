#include "hdflow/renorm_ode.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <string>

#include "hdflow/errors.hpp"

namespace hdflow {

namespace odeint = boost::numeric::odeint;

namespace {

double sup_norm(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::vector<RenormSample> integrate_renormalized(const LinearRhs& rhs, std::vector<double> x0, double t0, double T,
                                                 const RenormOptions& opt) {
  if (!(T >= t0)) throw InvalidArgument("integrate_renormalized: T must be >= t0");
  if (!(opt.record_interval > 0)) throw InvalidArgument("record_interval must be positive");
  double n0 = sup_norm(x0);
  if (!(n0 > 0) || !std::isfinite(n0)) throw InvalidArgument("initial state must be finite and nonzero");

  double S = std::log(n0);
  for (double& v : x0) v /= n0;

  using State = std::vector<double>;
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  auto sys = [&rhs](const State& x, State& dx, double t) { rhs(x, dx, t); };

  std::vector<RenormSample> out;
  out.push_back({t0, S, x0});

  State x = x0;
  // The pair is FSAL; we keep the derivative ourselves so it can be rescaled
  // together with the state (exact for a linear system).
  State dxdt(x.size());
  rhs(x, dxdt, t0);
  double t = t0;
  double dt = opt.initial_step;
  long k = 1;
  long steps = 0;
  while (t < T) {
    double target = std::min(T, t0 + k * opt.record_interval);
    while (t < target) {
      double h = std::min(dt, target - t);
      // try_step may shrink h and retry; it updates t and x only on success.
      double h_try = h;
      auto res = stepper.try_step(sys, x, dxdt, t, h_try);
      if (res == odeint::success) {
        double n = sup_norm(x);
        if (!(n > 0) || !std::isfinite(n)) throw ToleranceError("renormalized integration lost the solution (norm " + std::to_string(n) + ")");
        for (double& v : x) v /= n;
        for (double& v : dxdt) v /= n;
        S += std::log(n);
        // h_try now holds the suggested next step; keep it unless we were
        // only clipped by the record boundary.
        dt = h < dt ? std::max(dt, h_try) : h_try;
        if (target - t < 1e-14 * std::max(1.0, std::abs(target))) t = target;
      } else {
        dt = h_try;
        if (dt < opt.min_step) throw ToleranceError("step size underflow at t = " + std::to_string(t) + " (stiff system?)");
      }
      if (++steps > opt.max_steps) throw ResourceLimit("renormalized integration exceeded the step cap");
    }
    out.push_back({t, S, x});
    ++k;
  }
  return out;
}

}  // namespace hdflow
