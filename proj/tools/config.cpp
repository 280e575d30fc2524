#include "config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hdflow/errors.hpp"

namespace hdflow::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  return s.substr(a, s.find_last_not_of(ws) - a + 1);
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

std::uint64_t parse_seed(const std::string& v) {
  std::uint64_t s = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
  if (ec != std::errc() || p != v.data() + v.size())
    throw InvalidArgument("seed: expected a non-negative integer, got '" + v + "'");
  return s;
}

}  // namespace

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw InvalidArgument("bad key '" + key + "'");
  if (value.find('\n') != std::string::npos) throw InvalidArgument(key + ": value spans lines");
  const std::string v(trim(value));
  if (key == "command")
    cfg.command = v;
  else if (key == "seed")
    cfg.seed = parse_seed(v);
  else if (key == "out") {
    if (v.empty()) throw InvalidArgument("out: empty output directory");
    cfg.out_dir = v;
  } else
    cfg.params[key] = v;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) throw InvalidArgument("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
    set_value(cfg, key, std::string(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& cfg) {
  std::ostringstream os;
  os << "command = " << cfg.command << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "out = " << cfg.out_dir.string() << '\n';
  for (const auto& [k, v] : cfg.params) os << k << " = " << v << '\n';
  return os.str();
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw InvalidArgument("override '" + std::string(assignment) + "' is not of the form key=value");
  set_value(cfg, std::string(trim(assignment.substr(0, eq))), std::string(assignment.substr(eq + 1)));
}

double parse_real(const std::string& key, const std::string& value) {
  double x = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || p != value.data() + value.size() || value.empty())
    throw InvalidArgument(key + ": expected a number, got '" + value + "'");
  return x;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string_view rest = value;
  while (true) {
    const auto c = rest.find(',');
    const std::string item(trim(rest.substr(0, c)));
    out.push_back(parse_real(key, item));
    if (c == std::string_view::npos) break;
    rest = rest.substr(c + 1);
  }
  return out;
}

Params::Params(RunConfig cfg, const std::vector<ParamSpec>& schema) : cfg_(std::move(cfg)) {
  for (const auto& s : schema) kinds_[s.name] = s.kind;
  for (const auto& [k, v] : cfg_.params)
    if (!kinds_.count(k)) throw InvalidArgument(k + ": unknown key for '" + cfg_.command + "'");
  for (const auto& s : schema) {
    auto it = cfg_.params.find(s.name);
    if (it == cfg_.params.end()) {
      if (s.required) throw InvalidArgument(s.name + ": required key is missing");
      cfg_.params[s.name] = s.fallback;
    }
  }
  // Parse everything once so type errors surface before any work starts.
  for (const auto& s : schema) {
    switch (s.kind) {
      case Kind::Real: real(s.name); break;
      case Kind::Integer: integer(s.name); break;
      case Kind::Bool: flag(s.name); break;
      case Kind::RealList: reals(s.name); break;
      case Kind::Text:
      case Kind::Path: break;
    }
  }
}

const std::string& Params::raw(const std::string& key) const {
  auto it = cfg_.params.find(key);
  if (it == cfg_.params.end()) throw InvalidArgument(key + ": not in the schema");
  return it->second;
}

double Params::real(const std::string& key) const { return parse_real(key, raw(key)); }

long long Params::integer(const std::string& key) const {
  // Accepts 1e6 as well as 1000000.
  const double x = parse_real(key, raw(key));
  if (!(std::abs(x) < 9e15) || x != std::floor(x)) fail(key, "expected an integer, got '" + raw(key) + "'");
  return static_cast<long long>(x);
}

bool Params::flag(const std::string& key) const {
  const auto& v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

const std::string& Params::text(const std::string& key) const { return raw(key); }

std::vector<double> Params::reals(const std::string& key) const { return parse_real_list(key, raw(key)); }

double Params::positive(const std::string& key) const {
  const double x = real(key);
  if (!(x > 0) || !std::isfinite(x)) fail(key, "must be positive and finite");
  return x;
}

double Params::nonnegative(const std::string& key) const {
  const double x = real(key);
  if (!(x >= 0) || !std::isfinite(x)) fail(key, "must be non-negative and finite");
  return x;
}

double Params::in_open(const std::string& key, double lo, double hi) const {
  const double x = real(key);
  if (!(x > lo && x < hi)) {
    std::ostringstream os;
    os << "must lie in (" << lo << ", " << hi << ")";
    fail(key, os.str());
  }
  return x;
}

long long Params::at_least(const std::string& key, long long lo) const {
  const long long n = integer(key);
  if (n < lo) fail(key, "must be at least " + std::to_string(lo));
  return n;
}

void Params::fail(const std::string& key, const std::string& why) const { throw InvalidArgument(key + ": " + why); }

}  // namespace hdflow::cli
