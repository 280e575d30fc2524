#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hdflow::cli {

// One run: a subcommand plus its parameters. command, seed and out are
// reserved keys in the text form; everything else lands in params.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  bool operator==(const RunConfig&) const = default;
};

// key = value lines, '#' comments, blank lines ignored. Later keys win.
// Throws InvalidArgument with the line number on malformed input.
RunConfig parse_config(std::string_view text);
RunConfig read_config(const std::filesystem::path& path);
// Canonical form: reserved keys first, then params in key order.
std::string serialize(const RunConfig& cfg);
// "key=value" from the command line.
void apply_override(RunConfig& cfg, std::string_view assignment);
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);

enum class Kind { Real, Integer, Bool, Text, Path, RealList };

struct ParamSpec {
  std::string name;
  Kind kind;
  std::string fallback;
  std::string doc;
  bool required = false;
};

// Typed view of a config checked against a subcommand's schema: unknown keys,
// missing required keys and unparsable values throw InvalidArgument naming
// the key. Defaults are filled in so the manifest records every value used.
class Params {
 public:
  Params(RunConfig cfg, const std::vector<ParamSpec>& schema);
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  // Range helpers; the message names the key.
  double positive(const std::string& key) const;
  double nonnegative(const std::string& key) const;
  double in_open(const std::string& key, double lo, double hi) const;
  long long at_least(const std::string& key, long long lo) const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  const RunConfig& resolved() const { return cfg_; }

 private:
  RunConfig cfg_;
  std::map<std::string, Kind> kinds_;
  const std::string& raw(const std::string& key) const;
};

double parse_real(const std::string& key, const std::string& value);
std::vector<double> parse_real_list(const std::string& key, const std::string& value);

}  // namespace hdflow::cli
