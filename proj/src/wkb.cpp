#include "hdflow/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "hdflow/errors.hpp"

namespace hdflow::wkb {

int WkbGraph::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == name) return static_cast<int>(i);
  return -1;
}

WkbGraph build_graph(const SystemDescription& sys) {
  WkbGraph g;
  g.nodes = sys.variables;
  auto node = [&g](const std::string& name) {
    if (name.empty()) throw InvalidArgument("coupling with an empty variable name");
    int i = g.index_of(name);
    if (i >= 0) return i;
    g.nodes.push_back(name);
    return static_cast<int>(g.nodes.size() - 1);
  };
  // (from, to, thick) -> accumulated coefficient, in first-seen order.
  std::map<std::tuple<int, int, bool>, std::size_t> seen;
  std::vector<Edge> acc;
  auto add = [&](int from, int to, double c, bool thick) {
    if (!std::isfinite(c)) throw InvalidArgument("non-finite coupling coefficient");
    if (c == 0.0) return;
    auto key = std::make_tuple(from, to, thick);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, acc.size());
      acc.push_back({from, to, c, thick});
    } else {
      acc[it->second].coeff += c;
    }
  };
  for (const auto& c : sys.couplings) {
    int to = node(c.target);
    int from = node(c.source);
    add(from, to, c.constant, false);
    add(from, to, c.slope, true);
  }
  for (const auto& e : acc)
    if (e.coeff != 0.0) g.edges.push_back(e);
  return g;
}

SystemDescription parse_system(std::string_view text) {
  SystemDescription sys;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string target, source, coeff, kind, extra;
    if (!(ls >> target)) continue;
    if (!(ls >> source >> coeff)) throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'target source coeff [thick]'");
    double c;
    try {
      std::size_t pos = 0;
      c = std::stod(coeff, &pos);
      if (pos != coeff.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": bad coefficient '" + coeff + "'");
    }
    bool thick = false;
    if (ls >> kind) {
      if (kind == "thick")
        thick = true;
      else if (kind != "thin")
        throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'thick' or 'thin', got '" + kind + "'");
    }
    if (ls >> extra) throw InvalidArgument("line " + std::to_string(lineno) + ": trailing tokens");
    Coupling cp{target, source, thick ? 0.0 : c, thick ? c : 0.0};
    sys.couplings.push_back(cp);
  }
  return sys;
}

SystemDescription moment_system(const moments::ShearParams& p) {
  using moments::Sym3;
  SystemDescription sys;
  for (const char* n : moments::kSym3Names) sys.variables.emplace_back(n);
  for (int j = 0; j < 6; ++j) {
    Sym3 e{};
    e[j] = 1.0;
    Sym3 f0 = moments::moment_rhs(e, 0.0, p), f1 = moments::moment_rhs(e, 1.0, p), f2 = moments::moment_rhs(e, 2.0, p);
    for (int i = 0; i < 6; ++i) {
      double a = f0[i], s = f1[i] - f0[i];
      if (std::abs(f2[i] - (a + 2 * s)) > 1e-12 * (std::abs(a) + std::abs(s) + 1))
        throw InvalidArgument("moment system is not affine in t");
      if (a != 0.0 || s != 0.0) sys.couplings.push_back({moments::kSym3Names[i], moments::kSym3Names[j], a, s});
    }
  }
  return sys;
}

std::vector<std::vector<int>> enumerate_cycles(const WkbGraph& g, std::size_t cap) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> out_edges(n);
  for (std::size_t k = 0; k < g.edges.size(); ++k) out_edges[g.edges[k].from].push_back(static_cast<int>(k));

  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::vector<char> on_path(n, 0);
  // Cycles are rooted at their smallest node, so each is found exactly once.
  for (int s = 0; s < n; ++s) {
    auto dfs = [&](auto&& self, int v) -> void {
      for (int k : out_edges[v]) {
        int w = g.edges[k].to;
        if (w == s) {
          path.push_back(k);
          cycles.push_back(path);
          path.pop_back();
          if (cycles.size() > cap) throw ResourceLimit("cycle enumeration exceeded the cap of " + std::to_string(cap));
        } else if (w > s && !on_path[w]) {
          on_path[w] = 1;
          path.push_back(k);
          self(self, w);
          path.pop_back();
          on_path[w] = 0;
        }
      }
    };
    on_path[s] = 1;
    dfs(dfs, s);
    on_path[s] = 0;
  }
  return cycles;
}

CycleReport make_report(const WkbGraph& g, const std::vector<int>& edge_cycle) {
  CycleReport r;
  r.L = static_cast<int>(edge_cycle.size());
  r.C0 = 1.0;
  for (int k : edge_cycle) {
    const Edge& e = g.edges[k];
    r.cycle.push_back(e.from);
    r.names.push_back(g.nodes[e.from]);
    r.T += e.thick ? 1 : 0;
    r.C0 *= e.coeff;
  }
  // omega^L = sgn(C0), choosing the root with the largest real part.
  const double pi = std::numbers::pi;
  const int L = r.L;
  if (r.C0 > 0) {
    r.omega = {1.0, 0.0};
  } else {
    // roots exp(i pi (2k+1)/L); the largest real part is at k = 0.
    r.omega = std::polar(1.0, pi / L);
    if (L == 1) r.omega = {-1.0, 0.0};
  }
  r.exponent = 1.0 + static_cast<double>(r.T) / L;
  r.amplitude = std::pow(std::abs(r.C0), 1.0 / L) / r.exponent;
  return r;
}

std::vector<CycleReport> dominant_cycles(const WkbGraph& g, std::size_t cap) {
  auto cycles = enumerate_cycles(g, cap);
  if (cycles.empty()) throw InvalidArgument("graph has no cycle; the WKB rule needs at least one");
  std::vector<CycleReport> reports;
  reports.reserve(cycles.size());
  for (const auto& c : cycles) reports.push_back(make_report(g, c));

  // Largest T/L, compared exactly as integers.
  auto better_ratio = [](const CycleReport& a, const CycleReport& b) { return a.T * b.L > b.T * a.L; };
  const CycleReport* best = &reports[0];
  for (const auto& r : reports)
    if (better_ratio(r, *best)) best = &r;
  if (best->T == best->L) throw InvalidArgument("dominant cycle is entirely thick (T = L); leading-order rule does not apply");

  auto growth = [](const CycleReport& r) { return r.amplitude; };
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& r : reports)
    if (r.T * best->L == best->T * r.L) top = std::max(top, growth(r));
  std::vector<CycleReport> winners;
  for (const auto& r : reports)
    if (r.T * best->L == best->T * r.L && std::abs(growth(r) - top) <= 1e-12 * std::abs(top)) winners.push_back(r);
  return winners;
}

double predict_S(const CycleReport& r, double t) {
  if (!(t > 0)) throw InvalidArgument("predict_S: t must be positive");
  return r.amplitude * r.omega.real() * std::pow(t, r.exponent);
}

}  // namespace hdflow::wkb
