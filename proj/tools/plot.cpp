#include "plot.hpp"

#include <sstream>

#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"

namespace hdflow::cli {

namespace {

namespace fs = std::filesystem;

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += csv::fmt(v[i]);
  }
  return s + "]";
}

// Column by name, with the file in the message when it is missing.
std::vector<double> need(const csv::Table& t, const fs::path& file, const std::string& name) {
  for (const auto& h : t.header)
    if (h == name) return t.col(name);
  throw InvalidArgument("plot: " + file.string() + " has no column '" + name + "'");
}

void expect_files(const std::string& kind, const std::vector<fs::path>& csvs, std::size_t lo, std::size_t hi) {
  if (csvs.size() < lo || csvs.size() > hi) {
    std::ostringstream os;
    os << "plot: kind '" << kind << "' takes " << lo;
    if (hi != lo) os << (hi > 100 ? " or more" : " to " + std::to_string(hi));
    os << " CSV file(s), got " << csvs.size();
    throw InvalidArgument(os.str());
  }
}

const char* kPrelude = R"py(#!/usr/bin/env python3
import sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
inf, nan = float("inf"), float("nan")
)py";

const char* kSave = R"py(fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_OUT
fig.savefig(out, dpi=150)
print("wrote", out)
)py";

}  // namespace

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> k{"moments", "trace", "front", "decay", "dispersion"};
  return k;
}

std::string emit_plot_script(const std::string& kind, const std::vector<fs::path>& csvs) {
  std::ostringstream py;
  py << kPrelude << "# generated by: hdflow plot --kind " << kind;
  for (const auto& f : csvs) py << ' ' << f.filename().string();
  py << "\nDEFAULT_OUT = \"" << kind << ".png\"\n";

  if (kind == "moments") {
    expect_files(kind, csvs, 2, 2);
    const auto m = csv::read(csvs[0]);
    const auto f = csv::read(csvs[1]);
    py << "t = " << list(need(m, csvs[0], "t")) << '\n';
    py << "S = " << list(need(m, csvs[0], "S")) << '\n';
    for (const char* c : {"c1", "c2", "c3", "c1_wkb", "c2_wkb"}) py << c << " = " << csv::fmt(need(f, csvs[1], c).at(0)) << '\n';
    py << R"py(fig, ax = plt.subplots()
ax.plot(t, S, "k-", lw=2, label="S(t) = log scale")
ax.plot(t, [c1 * x ** (5 / 3) + c2 * x + c3 for x in t], "b--", label="fit c1 t^(5/3) + c2 t + c3")
ax.plot(t, [c1_wkb * x ** (5 / 3) + c2_wkb * x for x in t], "r:", lw=2, label="WKB c1 t^(5/3) + c2 t")
ax.set_xlabel("t")
ax.set_ylabel("S")
ax.set_title("c1 fit %.5g, WKB %.5g" % (c1, c1_wkb))
ax.legend()
)py";
  } else if (kind == "trace") {
    expect_files(kind, csvs, 1, 1000);
    py << "series = []\n";
    for (const auto& file : csvs) {
      const auto tb = csv::read(file);
      py << "series.append((\"" << file.filename().string() << "\", " << list(need(tb, file, "t")) << ", "
         << list(need(tb, file, "epsilon")) << "))\n";
    }
    py << R"py(fig, ax = plt.subplots()
for name, t, eps in series:
    pts = [(x, x * e) for x, e in zip(t, eps) if x > 0]
    ax.plot([p[0] for p in pts], [p[1] for p in pts], label=name)
ax.set_xscale("log")
ax.set_xlabel("t")
ax.set_ylabel("t * epsilon(t)")
ax.legend()
)py";
  } else if (kind == "front") {
    expect_files(kind, csvs, 1, 1);
    const auto tb = csv::read(csvs[0]);
    py << "xi = " << list(need(tb, csvs[0], "xi")) << '\n';
    py << "prof = " << list(need(tb, csvs[0], "profile")) << '\n';
    py << "gauss = " << list(need(tb, csvs[0], "gaussian")) << '\n';
    py << R"py(fig, ax = plt.subplots()
ax.plot(xi, prof, "k-", label="normalized slice")
ax.plot(xi, gauss, "r--", label="exp(-xi^2/4), normalized")
ax.set_xlim(-8, 8)
ax.set_xlabel("xi")
ax.legend()
)py";
  } else if (kind == "decay") {
    expect_files(kind, csvs, 1, 1);
    const auto tb = csv::read(csvs[0]);
    py << "gamma = " << list(need(tb, csvs[0], "gamma")) << '\n';
    py << "fitted = " << list(need(tb, csvs[0], "fitted_slope")) << '\n';
    py << "predicted = " << list(need(tb, csvs[0], "predicted_slope")) << '\n';
    py << R"py(fig, ax = plt.subplots()
ax.plot(gamma, predicted, "r--", marker="s", label="predicted")
ax.plot(gamma, fitted, "ko", label="fitted")
ax.set_xlabel("gamma")
ax.set_ylabel("slope of log R(tau)")
ax.legend()
)py";
  } else if (kind == "dispersion") {
    expect_files(kind, csvs, 1, 1);
    const auto tb = csv::read(csvs[0]);
    py << "eps = " << list(need(tb, csvs[0], "epsilon")) << '\n';
    py << "k = " << list(need(tb, csvs[0], "k")) << '\n';
    py << "z0 = " << list(need(tb, csvs[0], "z0_re")) << '\n';
    py << "beta = " << list(need(tb, csvs[0], "beta")) << "[0]\n";
    py << R"py(pts = sorted((e, z) for e, z, kk in zip(eps, z0, k) if kk == 0)
fig, ax = plt.subplots()
ax.loglog([p[0] for p in pts], [p[1] for p in pts], "ko-", label="z0(0; eps)")
e0, z0_ref = pts[0]
ax.loglog([p[0] for p in pts], [z0_ref * (p[0] / e0) ** (1 / beta) for p in pts], "r--",
          label="slope 1/beta = %.3g" % (1 / beta))
ax.set_xlabel("epsilon")
ax.set_ylabel("z0")
ax.legend()
)py";
  } else {
    throw InvalidArgument("plot: unknown kind '" + kind + "'");
  }
  py << kSave;
  return py.str();
}

}  // namespace hdflow::cli
