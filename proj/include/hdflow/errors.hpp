#pragma once

#include <stdexcept>
#include <string>

namespace hdflow {

// Everything the library throws derives from Error so callers (the CLI in
// particular) can map categories to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed matrices, out-of-range parameters, unknown keys.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A numerical procedure could not meet its tolerance (quadrature, Newton,
// inner fixed point, step-size underflow, cross-check mismatch).
class ToleranceError : public Error {
 public:
  using Error::Error;
};

// det(I + tA) vanished: the affine flow has a finite-time singularity.
class HorizonExceeded : public Error {
 public:
  HorizonExceeded(double t, double horizon)
      : Error("t = " + std::to_string(t) + " is beyond the flow horizon " + std::to_string(horizon)),
        t_(t), horizon_(horizon) {}
  double time() const { return t_; }
  double horizon() const { return horizon_; }

 private:
  double t_;
  double horizon_;
};

class ClassificationFailure : public Error {
 public:
  using Error::Error;
};

// Grid/step choices that cannot resolve the problem (coarse X grid, short fit
// window). Distinct from ToleranceError because the fix is a different input.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Hard caps (cycle enumeration, particle counts) that guard against runaway
// inputs.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace hdflow
