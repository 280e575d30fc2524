#pragma once

#include <functional>
#include <vector>

namespace hdflow {

// dx/dt = F(t) x for a linear system whose solution grows like exp(c t^p).
// The state is carried as x = exp(S) U with max|U| = 1; since the system is
// linear, rescaling U between steps changes nothing but the bookkeeping.
using LinearRhs = std::function<void(const std::vector<double>& x, std::vector<double>& dxdt, double t)>;

struct RenormOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  double record_interval = 0.5;
  long max_steps = 50'000'000;
};

struct RenormSample {
  double t;
  double log_scale;
  std::vector<double> unit;
};

// Samples at t0, t0 + record_interval, ..., and at T. Throws ToleranceError on
// step-size underflow.
std::vector<RenormSample> integrate_renormalized(const LinearRhs& rhs, std::vector<double> x0, double t0, double T,
                                                 const RenormOptions& opt = {});

}  // namespace hdflow
