#pragma once

#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "hdflow/frozen_flows.hpp"
#include "hdflow/profile.hpp"

namespace hdflow::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kToleranceFailure = 3, kResourceCap = 4, kOtherFailure = 1 };

// Where a run writes. Every table goes through here so the manifest can list it.
class Output {
 public:
  Output(std::filesystem::path dir, std::ostream& log);
  void table(const std::string& file, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments = {});
  std::filesystem::path path(const std::string& file) const { return dir_ / file; }
  void note_file(const std::string& file) { files_.push_back(file); }
  const std::vector<std::string>& files() const { return files_; }
  std::ostream& log() { return log_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::ostream& log_;
};

struct Command {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> schema;
  std::function<void(const Params&, std::uint64_t seed, Output&)> run;
};

std::vector<Command> flow_commands();  // classify, moments, wkb
std::vector<Command> toy_commands();   // toy-det, toy-sc, toy-mc, dispersion
std::vector<Command> gas_commands();   // frozen, entropy

const std::vector<Command>& registry();
// Throws InvalidArgument for an unknown name.
const Command& find_command(const std::string& name);

// Runs one config: validates, writes the tables and out/manifest.cfg.
// Returns the exit code; diagnostics go to err.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int exit_code_for(std::exception_ptr e, std::ostream& err);

// Shared parameter groups.
std::vector<ParamSpec> toy_profile_keys();
toy::InitialProfile toy_profile(const Params& p);
std::vector<ParamSpec> velocity_profile_keys();
frozen::VelocityProfile velocity_profile(const Params& p);

// Evenly spaced grid with n points on [lo, hi].
std::vector<double> linspace(double lo, double hi, long long n);

template <class... Groups>
std::vector<ParamSpec> join(std::vector<ParamSpec> a, const Groups&... rest) {
  (a.insert(a.end(), rest.begin(), rest.end()), ...);
  return a;
}

}  // namespace hdflow::cli
