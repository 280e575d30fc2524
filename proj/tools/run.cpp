#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"

namespace hdflow::cli {

namespace fs = std::filesystem;

Output::Output(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {}

void Output::table(const std::string& file, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments) {
  csv::write(dir_ / file, header, rows, comments);
  files_.push_back(file);
}

const std::vector<Command>& registry() {
  static const std::vector<Command> all = [] {
    std::vector<Command> v = flow_commands();
    for (auto& c : toy_commands()) v.push_back(std::move(c));
    for (auto& c : gas_commands()) v.push_back(std::move(c));
    return v;
  }();
  return all;
}

const Command& find_command(const std::string& name) {
  for (const auto& c : registry())
    if (c.name == name) return c;
  throw InvalidArgument("command: unknown subcommand '" + name + "'");
}

namespace {

std::string versions() {
  std::ostringstream os;
  os << "hdflow " << HDFLOW_VERSION << "; boost " << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000
     << "; eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return os.str();
}

void write_manifest(const fs::path& path, const RunConfig& resolved, const std::vector<std::string>& files,
                    double wall) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("out: cannot write " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", wall);
  os << "# hdflow run manifest; rerun with: hdflow run " << path.filename().string() << '\n';
  os << "# versions: " << versions() << '\n';
  os << "# wall_time_s: " << buf << '\n';
  os << "# tables:";
  for (const auto& f : files) os << ' ' << f;
  os << '\n';
  os << serialize(resolved);
  if (!os) throw InvalidArgument("out: write failed for " + path.string());
}

}  // namespace

int exit_code_for(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const InvalidArgument& x) {
    err << "config error: " << x.what() << '\n';
    return kConfigError;
  } catch (const ResolutionError& x) {
    err << "config error (resolution): " << x.what() << '\n';
    return kConfigError;
  } catch (const HorizonExceeded& x) {
    err << "config error: " << x.what() << '\n';
    return kConfigError;
  } catch (const ToleranceError& x) {
    err << "tolerance failure: " << x.what() << '\n';
    return kToleranceFailure;
  } catch (const ClassificationFailure& x) {
    err << "tolerance failure (classification): " << x.what() << '\n';
    return kToleranceFailure;
  } catch (const ResourceLimit& x) {
    err << "resource cap: " << x.what() << '\n';
    return kResourceCap;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kOtherFailure;
  }
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Command& c = find_command(cfg.command);
    const Params p(cfg, c.schema);
    fs::create_directories(cfg.out_dir);
    Output o(cfg.out_dir, out);
    const auto t0 = std::chrono::steady_clock::now();
    c.run(p, cfg.seed, o);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg.out_dir / "manifest.cfg", p.resolved(), o.files(), wall);
    out << "wrote " << (cfg.out_dir / "manifest.cfg").string() << '\n';
    return kOk;
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
}

std::vector<double> linspace(double lo, double hi, long long n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = hi;
    return v;
  }
  for (long long i = 0; i < n; ++i) v[i] = i == n - 1 ? hi : lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

std::vector<ParamSpec> toy_profile_keys() {
  return {
      {"profile", Kind::Text, "gaussian", "initial G0(X): gaussian, bump or csv"},
      {"X0", Kind::Real, "0", "centre of the preset"},
      {"width", Kind::Real, "0.5", "gaussian width or bump half-width"},
      {"mass", Kind::Real, "1", "physical mass int G0 e^X"},
      {"profile_file", Kind::Path, "none", "CSV with columns X,G when profile = csv"},
  };
}

toy::InitialProfile toy_profile(const Params& p) {
  const auto& kind = p.text("profile");
  const double mass = p.positive("mass");
  if (kind == "gaussian") return toy::InitialProfile::gaussian(p.real("X0"), p.positive("width")).with_mass(mass);
  if (kind == "bump") return toy::InitialProfile::bump(p.real("X0"), p.positive("width")).with_mass(mass);
  if (kind == "csv") return toy::InitialProfile::from_csv(p.text("profile_file")).with_mass(mass);
  p.fail("profile", "expected gaussian, bump or csv, got '" + kind + "'");
}

std::vector<ParamSpec> velocity_profile_keys() {
  return {
      {"profile", Kind::Text, "maxwellian", "G0(w): maxwellian, gaussian, bump or csv"},
      {"rho", Kind::Real, "1", "maxwellian density"},
      {"theta", Kind::Real, "1", "maxwellian temperature (particle mass 2)"},
      {"drift", Kind::RealList, "0,0,0", "mean velocity or bump centre"},
      {"cov", Kind::RealList, "0.5,0,0,0.5,0,0.5", "gaussian covariance 11,12,13,22,23,33"},
      {"gmass", Kind::Real, "1", "gaussian or bump mass"},
      {"radius", Kind::Real, "2", "bump radius"},
      {"profile_file", Kind::Path, "none", "CSV with columns w1,w2,w3,G when profile = csv"},
  };
}

frozen::VelocityProfile velocity_profile(const Params& p) {
  const auto& kind = p.text("profile");
  const auto d = p.reals("drift");
  if (d.size() != 3) p.fail("drift", "expected 3 components");
  const frozen::Vec3 u(d[0], d[1], d[2]);
  if (kind == "maxwellian") return frozen::VelocityProfile::maxwellian(p.positive("rho"), p.positive("theta"), u);
  if (kind == "gaussian") {
    const auto c = p.reals("cov");
    if (c.size() != 6) p.fail("cov", "expected 6 entries 11,12,13,22,23,33");
    frozen::Mat3 S;
    S << c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5];
    Eigen::SelfAdjointEigenSolver<frozen::Mat3> es(S);
    if (!(es.eigenvalues().minCoeff() > 0)) p.fail("cov", "must be positive definite");
    return frozen::VelocityProfile::gaussian(S, u, p.positive("gmass"));
  }
  if (kind == "bump") return frozen::VelocityProfile::bump(p.positive("radius"), p.positive("gmass"), u);
  if (kind == "csv") return frozen::VelocityProfile::from_csv(p.text("profile_file"));
  p.fail("profile", "expected maxwellian, gaussian, bump or csv, got '" + kind + "'");
}

}  // namespace hdflow::cli
