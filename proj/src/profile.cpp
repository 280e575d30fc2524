#include "hdflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"
#include "hdflow/quadrature.hpp"

namespace hdflow::toy {

InitialProfile::InitialProfile(std::function<double(double)> shape, std::pair<double, double> support,
                               std::string description, std::vector<double> kinks)
    : shape_(std::move(shape)), support_(support), description_(std::move(description)), kinks_(std::move(kinks)) {}

InitialProfile InitialProfile::gaussian(double mean, double width) {
  if (!(width > 0) || !std::isfinite(mean) || !std::isfinite(width))
    throw InvalidArgument("gaussian profile needs finite mean and width > 0");
  const double norm = 1.0 / (width * std::sqrt(2 * std::numbers::pi));
  std::ostringstream d;
  d << "gaussian(mean=" << mean << ",width=" << width << ")";
  return InitialProfile([=](double X) { double u = (X - mean) / width; return norm * std::exp(-0.5 * u * u); },
                        {mean - 38 * width, mean + 38 * width}, d.str(), {mean});
}

InitialProfile InitialProfile::bump(double center, double half_width) {
  if (!(half_width > 0) || !std::isfinite(center)) throw InvalidArgument("bump profile needs half_width > 0");
  // int_{-1}^{1} exp(-1/(1-u^2)) du
  const double unit = quad::gk([](double u) { return std::exp(-1.0 / (1 - u * u)); }, -1.0 + 1e-15, 1.0 - 1e-15,
                               {.rel = 1e-14});
  const double norm = 1.0 / (unit * half_width);
  std::ostringstream d;
  d << "bump(center=" << center << ",half_width=" << half_width << ")";
  return InitialProfile(
      [=](double X) {
        double u = (X - center) / half_width;
        return std::abs(u) < 1 ? norm * std::exp(-1.0 / (1 - u * u)) : 0.0;
      },
      {center - half_width, center + half_width}, d.str(), {center});
}

InitialProfile InitialProfile::tabulated(std::vector<double> X, std::vector<double> G) {
  if (X.size() != G.size() || X.size() < 2) throw InvalidArgument("tabulated profile needs >= 2 matching points");
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (!std::isfinite(X[i]) || !std::isfinite(G[i])) throw InvalidArgument("tabulated profile: non-finite entry");
    if (G[i] < 0) throw InvalidArgument("tabulated profile: negative density");
    if (i && !(X[i] > X[i - 1])) throw InvalidArgument("tabulated profile: X must be strictly increasing");
  }
  std::pair<double, double> sup{X.front(), X.back()};
  std::vector<double> kinks(X.begin() + 1, X.end() - 1);
  auto shape = [X = std::move(X), G = std::move(G)](double x) {
    if (x < X.front() || x > X.back()) return 0.0;
    auto it = std::upper_bound(X.begin(), X.end(), x);
    if (it == X.end()) return G.back();
    std::size_t j = static_cast<std::size_t>(it - X.begin());
    double w = (x - X[j - 1]) / (X[j] - X[j - 1]);
    return (1 - w) * G[j - 1] + w * G[j];
  };
  return InitialProfile(shape, sup, "tabulated", kinks);
}

InitialProfile InitialProfile::from_csv(const std::filesystem::path& path) {
  auto t = csv::read(path);
  auto p = tabulated(t.col("X"), t.col("G"));
  p.description_ = "tabulated(" + path.filename().string() + ")";
  return p;
}

double InitialProfile::moment(double beta) const {
  if (!std::isfinite(beta)) throw InvalidArgument("moment: beta must be finite");
  auto f = [&](double X) { return (*this)(X) * std::exp(beta * X); };
  // Integrate panel by panel between breakpoints so kinks sit on panel ends.
  std::vector<double> pts{support_.first};
  for (double k : kinks_)
    if (k > support_.first && k < support_.second) pts.push_back(k);
  pts.push_back(support_.second);
  double total = 0;
  quad::Tol tol{.rel = 1e-13, .abs = 0.0, .max_depth = 24};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += quad::gk(f, pts[i], pts[i + 1], tol);
  if (!std::isfinite(total)) throw InvalidArgument("moment: C_beta is not finite");
  return total;
}

InitialProfile InitialProfile::with_mass(double mass) const {
  if (!(mass > 0)) throw InvalidArgument("with_mass: mass must be positive");
  InitialProfile p = *this;
  double m = moment(1.0);
  if (!(m > 0)) throw InvalidArgument("with_mass: profile has zero mass");
  p.scale_ = scale_ * mass / m;
  return p;
}

}  // namespace hdflow::toy
