#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "hdflow/collision_moments.hpp"

namespace hdflow::wkb {

// d(target)/dt gets (constant + slope * t) * source.
struct Coupling {
  std::string target;
  std::string source;
  double constant = 0.0;
  double slope = 0.0;
};

struct SystemDescription {
  std::vector<std::string> variables;  // node order; may be left empty
  std::vector<Coupling> couplings;
};

struct Edge {
  int from;  // source variable (right-hand side)
  int to;    // target variable (left-hand side)
  double coeff;
  bool thick;  // coupling proportional to t
};

struct WkbGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  int index_of(std::string_view name) const;  // -1 if absent
};

// One thin edge per nonzero constant and one thick edge per nonzero slope;
// repeated couplings for the same (source, target) add up.
WkbGraph build_graph(const SystemDescription& sys);

// Structured text: one coupling per line, "target source coeff [thick|thin]";
// '#' starts a comment. Throws InvalidArgument on malformed lines.
SystemDescription parse_system(std::string_view text);

// The six second-moment equations of the combined shear, read off
// moment_rhs by probing it with unit tensors at two times.
SystemDescription moment_system(const moments::ShearParams& p);

// The -(4b/3) t correction to S(t) for the moment system. It comes from the
// elimination of the amplitude factors, which the graph rule does not see.
inline double moment_subleading_coefficient(double b) { return -4.0 * b / 3.0; }

struct CycleReport {
  std::vector<int> cycle;  // node indices, first node not repeated
  std::vector<std::string> names;
  int L = 0;
  int T = 0;
  double C0 = 0.0;
  std::complex<double> omega{1.0, 0.0};
  double exponent = 1.0;   // 1 + T/L
  double amplitude = 0.0;  // |C0|^{1/L} / (1 + T/L)
};

inline constexpr std::size_t kCycleCap = 10000;

// Every simple cycle as a list of edge indices (parallel thin/thick edges
// give distinct cycles). Throws ResourceLimit past the cap.
std::vector<std::vector<int>> enumerate_cycles(const WkbGraph& g, std::size_t cap = kCycleCap);

CycleReport make_report(const WkbGraph& g, const std::vector<int>& edge_cycle);

// Cycles with the largest T/L; ties broken by amplitude. Throws
// InvalidArgument for an acyclic graph or when the winner is all thick
// (T = L is outside the leading-order rule).
std::vector<CycleReport> dominant_cycles(const WkbGraph& g, std::size_t cap = kCycleCap);

// Leading-order S(t) = amplitude * Re(omega) * t^exponent.
double predict_S(const CycleReport& r, double t);

}  // namespace hdflow::wkb
