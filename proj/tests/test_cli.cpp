#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "app.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"
#include "plot.hpp"

using namespace hdflow;
using namespace hdflow::cli;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("hdflow_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hdflow");
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parse, serialize, parse is the identity") {
  const char* text = R"(# a comment
command = toy-mc
  n=  1e5
seed = 42

betas = 1, 2 ,3
out = some/dir
T = 40
path = /tmp/a b.csv
)";
  const auto a = parse_config(text);
  CHECK(a.command == "toy-mc");
  CHECK(a.seed == 42);
  CHECK(a.out_dir == fs::path("some/dir"));
  CHECK(a.params.at("n") == "1e5");
  CHECK(a.params.at("betas") == "1, 2 ,3");
  CHECK(a.params.at("path") == "/tmp/a b.csv");
  const auto b = parse_config(serialize(a));
  CHECK(b == a);
  CHECK(serialize(b) == serialize(a));

  // Random configs over the key alphabet and printable values.
  std::mt19937_64 rng(5);
  const std::string key_chars = "abcXYZ019_-.";
  const std::string val_chars = "abc 019.,-+=#/eE";
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    c.command = "cmd" + std::to_string(trial % 7);
    c.seed = rng();
    c.out_dir = "out" + std::to_string(trial);
    const int nk = rng() % 8;
    for (int k = 0; k < nk; ++k) {
      std::string key(1 + rng() % 6, 'a'), val(rng() % 12, 'x');
      for (auto& ch : key) ch = key_chars[rng() % key_chars.size()];
      for (auto& ch : val) ch = val_chars[rng() % val_chars.size()];
      if (key == "command" || key == "seed" || key == "out") continue;
      set_value(c, key, val);  // trims, as the parser does
    }
    const auto back = parse_config(serialize(c));
    REQUIRE(back == c);
  }
}

TEST_CASE("malformed configs are rejected with a location") {
  CHECK_THROWS_WITH_AS(parse_config("command = x\nno equals sign\n"), doctest::Contains("line 2"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("bad key = 1\n"), doctest::Contains("bad key"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("seed = -3\n"), doctest::Contains("seed"), InvalidArgument);
  RunConfig c;
  CHECK_THROWS_AS(apply_override(c, "novalue"), InvalidArgument);
  apply_override(c, "x = 3 ");
  CHECK(c.params.at("x") == "3");
}

TEST_CASE("schema checks name the offending key") {
  RunConfig c;
  c.command = "toy-mc";
  const auto& schema = find_command("toy-mc").schema;
  c.params["n"] = "1e6";
  Params p(c, schema);
  CHECK(p.integer("n") == 1000000);
  CHECK(p.resolved().params.at("T") == "40");  // default filled in
  c.params["n"] = "1.5";
  CHECK_THROWS_WITH_AS(Params(c, schema), doctest::Contains("n:"), InvalidArgument);
  c.params["n"] = "10";
  c.params["nn"] = "10";
  CHECK_THROWS_WITH_AS(Params(c, schema), doctest::Contains("nn: unknown key"), InvalidArgument);
  c.params.erase("nn");
  c.params["betas"] = "1,,2";
  CHECK_THROWS_WITH_AS(Params(c, schema), doctest::Contains("betas"), InvalidArgument);
  c.params["betas"] = "1";
  c.params["events"] = "maybe";
  CHECK_THROWS_WITH_AS(Params(c, schema), doctest::Contains("events"), InvalidArgument);
  std::vector<ParamSpec> req{{"must", Kind::Real, "", "required", true}};
  RunConfig r;
  CHECK_THROWS_WITH_AS(Params(r, req), doctest::Contains("must: required"), InvalidArgument);
}

TEST_CASE("exit codes by error category") {
  std::ostringstream sink;
  CHECK(exit_code_for(std::make_exception_ptr(InvalidArgument("x")), sink) == 2);
  CHECK(exit_code_for(std::make_exception_ptr(ResolutionError("x")), sink) == 2);
  CHECK(exit_code_for(std::make_exception_ptr(ToleranceError("x")), sink) == 3);
  CHECK(exit_code_for(std::make_exception_ptr(ResourceLimit("x")), sink) == 4);
  CHECK(exit_code_for(std::make_exception_ptr(std::runtime_error("x")), sink) == 1);

  Scratch s("codes");
  const auto out = (s.dir / "o").string();
  auto r = invoke({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("frobnicate") != std::string::npos);
  r = invoke({"moments", "-o", out, "K9=1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("K9") != std::string::npos);
  r = invoke({"toy-sc", "-o", out, "a=1.5"});
  CHECK(r.code == 2);
  CHECK(r.err.find("a:") != std::string::npos);
  r = invoke({"classify", "-o", out, "A=1,2,3"});
  CHECK(r.code == 2);
  CHECK(r.err.find("A:") != std::string::npos);
  r = invoke({"classify", "-o", out, "A=-1,0,0,0,0,0,0,0,0", "t_max=2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("t_max") != std::string::npos);
  // The tail quadrature cannot reach its target for a root this small at k = 0.5.
  r = invoke({"dispersion", "-o", out, "epsilons=1e-23", "ks=0.5"});
  CHECK(r.code == 3);
  CHECK(r.err.find("tolerance") != std::string::npos);
  r = invoke({"wkb", "-o", out, "cycle_cap=1"});
  CHECK(r.code == 4);
  r = invoke({"toy-mc", "-o", out, "events=true", "n=200000", "T=1"});
  CHECK(r.code == 4);
  r = invoke({"run", (s.dir / "missing.cfg").string()});
  CHECK(r.code == 2);
}

TEST_CASE("classify A = I reports a homogeneous dilatation") {
  Scratch s("classify");
  const auto r = invoke({"classify", "-o", s.dir.string(), "A=1,0,0,0,1,0,0,0,1"});
  REQUIRE(r.code == 0);
  CHECK(slurp(s.dir / "classification.txt").find("case = HomogeneousDilatation") != std::string::npos);
  const auto t = csv::read(s.dir / "flow.csv");
  // rho(t) = rho0 / (1 + t)^3
  CHECK(t.rows.back()[t.column("rho")] == doctest::Approx(1.0 / 1331).epsilon(1e-12));
}

TEST_CASE("toy-sc a = 0.5 to T = 1e4 ends near t eps = 1/2") {
  Scratch s("toysc");
  const auto r = invoke({"toy-sc", "-o", s.dir.string(), "a=0.5", "T=1e4"});
  REQUIRE(r.code == 0);
  const auto t = csv::read(s.dir / "selfconsistent.csv");
  REQUIRE(t.rows.size() > 10);
  CHECK(t.rows.back()[t.column("t")] == 1e4);
  for (std::size_t i = t.rows.size() - 5; i < t.rows.size(); ++i) CHECK(std::abs(t.rows[i][t.column("t_eps")] - 0.5) < 0.05);
}

TEST_CASE("moments fit agrees with the WKB coefficient in the same output") {
  Scratch s("moments");
  const auto r = invoke({"moments", "-o", s.dir.string(), "K1=1", "K3=1", "b=1", "T=150"});
  REQUIRE(r.code == 0);
  const auto f = csv::read(s.dir / "fit.csv");
  const double c1 = f.rows[0][f.column("c1")], w = f.rows[0][f.column("c1_wkb")];
  CHECK(w == doctest::Approx(0.6 * std::cbrt(4.0 / 3)).epsilon(1e-12));
  CHECK(std::abs(c1 / w - 1) < 0.05);
  CHECK(f.rows[0][f.column("c1_rel_err")] == doctest::Approx(std::abs(c1 / w - 1)));
}

TEST_CASE("a manifest reproduces every table byte for byte") {
  Scratch s("manifest");
  const std::vector<std::vector<std::string>> runs{
      {"toy-mc", "n=20000", "T=20", "records=5", "betas=0.5,1", "--seed", "99"},
      {"toy-mc", "mode=selfconsistent", "n=5000", "T=50", "records=12"},
      {"moments", "T=60"},
      {"dispersion", "epsilons=1e-2,1e-3", "ks=0,0.1"},
      {"toy-det", "T=10", "N=400", "field=true", "nt=101", "nX=1201", "X_hi=20"},
      {"entropy", "flow=cylindrical", "times=0,1"},
      {"classify", "A=0,1,0,0,0,0,0,0,0"},
      {"wkb"},
  };
  int k = 0;
  for (auto args : runs) {
    const fs::path a = s.dir / ("a" + std::to_string(k)), b = s.dir / ("b" + std::to_string(k));
    ++k;
    args.push_back("--out");
    args.push_back(a.string());
    INFO(args[0]);
    REQUIRE(invoke(args).code == 0);
    REQUIRE(invoke({"run", (a / "manifest.cfg").string(), "--out", b.string()}).code == 0);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      const auto name = e.path().filename();
      if (name == "manifest.cfg") continue;
      INFO(name.string());
      CHECK(slurp(e.path()) == slurp(b / name));
      ++compared;
    }
    CHECK(compared > 0);
    // Same resolved settings apart from the output directory.
    auto ma = read_config(a / "manifest.cfg"), mb = read_config(b / "manifest.cfg");
    CHECK(ma.out_dir == a);
    mb.out_dir = a;
    CHECK(ma == mb);
  }
}

TEST_CASE("manifest records defaults, seed and version; wall time only as a comment") {
  Scratch s("contents");
  REQUIRE(invoke({"toy-mc", "n=1000", "T=2", "--seed", "7", "-o", s.dir.string()}).code == 0);
  const auto text = slurp(s.dir / "manifest.cfg");
  CHECK(text.find("# versions: hdflow ") != std::string::npos);
  CHECK(text.find("# wall_time_s: ") != std::string::npos);
  const auto cfg = parse_config(text);
  CHECK(cfg.seed == 7);
  CHECK(cfg.command == "toy-mc");
  for (const auto& key : find_command("toy-mc").schema) CHECK(cfg.params.count(key.name) == 1);
  CHECK(cfg.params.count("wall_time_s") == 0);
}

TEST_CASE("config file plus overrides, and dry run") {
  Scratch s("cfgfile");
  const auto file = s.dir / "run.cfg";
  {
    std::ofstream os(file);
    os << "command = moments\nT = 30\nb = 2\n";
  }
  auto r = invoke({"moments", "--config", file.string(), "--dry-run", "b=0.5"});
  REQUIRE(r.code == 0);
  const auto c = parse_config(r.out);
  CHECK(c.params.at("T") == "30");
  CHECK(c.params.at("b") == "0.5");
  CHECK(c.params.at("K1") == "1");
  // A dry run's output is itself a valid config with the same content.
  CHECK(parse_config(serialize(c)) == c);
  r = invoke({"toy-sc", "--config", file.string(), "--dry-run"});
  CHECK(r.code == 2);
  CHECK(r.err.find("command") != std::string::npos);
}

TEST_CASE("toy-mc summaries do not depend on the thread count") {
  Scratch s("threads");
  const auto one = s.dir / "one", four = s.dir / "four";
  REQUIRE(invoke({"toy-mc", "n=30000", "T=20", "betas=1,2", "threads=1", "-o", one.string()}).code == 0);
  REQUIRE(invoke({"toy-mc", "n=30000", "T=20", "betas=1,2", "threads=4", "-o", four.string()}).code == 0);
  CHECK(slurp(one / "summary.csv") == slurp(four / "summary.csv"));
}

TEST_CASE("plot scripts") {
  Scratch s("plot");
  REQUIRE(invoke({"moments", "T=40", "-o", s.dir.string()}).code == 0);
  const std::vector<fs::path> pair{s.dir / "moments.csv", s.dir / "fit.csv"};
  const auto py = emit_plot_script("moments", pair);
  CHECK(py.find("c1_wkb = ") != std::string::npos);
  CHECK(py.find("x ** (5 / 3)") != std::string::npos);
  CHECK(py.find("import matplotlib") != std::string::npos);

  csv::write(s.dir / "roots.csv", {"epsilon", "beta", "k", "z0_re"}, {{1e-3, 2, 0, 0.032}, {1e-4, 2, 0, 0.01}});
  CHECK(emit_plot_script("dispersion", {s.dir / "roots.csv"}).find("1 / beta") != std::string::npos);

  csv::write(s.dir / "bad.csv", {"epsilon", "beta", "z0_re"}, {{1e-3, 2, 0.03}});
  CHECK_THROWS_WITH_AS(emit_plot_script("dispersion", {s.dir / "bad.csv"}), doctest::Contains("'k'"), InvalidArgument);
  CHECK_THROWS_WITH_AS(emit_plot_script("front", {s.dir / "fit.csv"}), doctest::Contains("'xi'"), InvalidArgument);
  CHECK_THROWS_AS(emit_plot_script("moments", {s.dir / "fit.csv"}), InvalidArgument);
  CHECK_THROWS_AS(emit_plot_script("histogram", {s.dir / "fit.csv"}), InvalidArgument);

  const auto script = s.dir / "p.py";
  auto r = invoke({"plot", "--kind", "decay", "--csv", (s.dir / "fit.csv").string(), "-o", script.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("gamma") != std::string::npos);
  r = invoke({"plot", "--kind", "moments", "--csv", pair[0].string(), "--csv", pair[1].string(), "-o", script.string()});
  CHECK(r.code == 0);
  CHECK(fs::file_size(script) > 100);
}
