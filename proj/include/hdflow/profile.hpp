#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hdflow::toy {

// Initial density G0(X) in the log-velocity coordinate X = log rho.
// Presets carry unit integral of G0; with_mass rescales so that the
// physical mass, the e^X-weighted integral, takes the given value.
class InitialProfile {
 public:
  static InitialProfile gaussian(double mean, double width);
  static InitialProfile bump(double center, double half_width);  // exp(-1/(1-u^2))
  // Piecewise linear through (X, G) and zero outside. Values must be >= 0.
  static InitialProfile tabulated(std::vector<double> X, std::vector<double> G);
  static InitialProfile from_csv(const std::filesystem::path& path);  // columns X,G

  double operator()(double X) const { return scale_ * shape_(X); }
  // C_beta = int G0 e^{beta X} dX.
  double moment(double beta) const;
  // Interval outside which G0 is zero or below ~1e-300 of its peak.
  std::pair<double, double> support() const { return support_; }
  InitialProfile with_mass(double mass) const;
  const std::string& description() const { return description_; }

 private:
  InitialProfile(std::function<double(double)> shape, std::pair<double, double> support, std::string description,
                 std::vector<double> kinks = {});
  std::function<double(double)> shape_;
  std::pair<double, double> support_;
  std::string description_;
  std::vector<double> kinks_;  // breakpoints for quadrature
  double scale_ = 1.0;
};

}  // namespace hdflow::toy
