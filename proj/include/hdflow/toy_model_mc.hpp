#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hdflow/profile.hpp"

namespace hdflow::mc {

struct Mode {
  enum class Kind { Constant, SelfConsistent };
  Kind kind = Kind::Constant;
  double epsilon = 0;  // Constant
  double a = 0;        // SelfConsistent, in (0, 1)
  static Mode constant(double eps) { return {Kind::Constant, eps, 0}; }
  static Mode self_consistent(double a) { return {Kind::SelfConsistent, 0, a}; }
};

// rho is stored as log_rho: constant-rate runs reach rho ~ e^{z0 t} and
// overflow long before anything else does.
struct ParticleEnsemble {
  std::vector<double> log_rho;
  std::vector<double> zeta;
  std::vector<double> weight;
  double t = 0;
  std::uint64_t seed = 0;
  double total_mass = 0;
  std::size_t size() const { return log_rho.size(); }
};

struct MomentEstimate {
  double beta = 0;
  double estimate = 0;      // E[(rho zeta)^beta], may be inf
  double se = 0;
  double log_estimate = 0;  // always finite for a nonempty ensemble
  double rel_se = 0;        // se / estimate
};

struct Record {
  double t = 0;
  double mass = 0;
  double epsilon = 0;
  std::uint64_t collisions = 0;  // cumulative
  std::vector<MomentEstimate> moments;
};

struct CollisionEvent {
  double t;
  std::uint64_t particle;
  double log_rho_before;
  double zeta_before;
  double log_rho_after;
};

struct SimOptions {
  std::vector<double> betas{1.0};
  // 0: take HDFLOW_THREADS from the environment, default 1.
  int threads = 0;
  // Self-consistent refresh interval max(sync_floor, sync_fraction * t).
  double sync_fraction = 0.01;
  double sync_floor = 0.01;
  bool event_log = false;  // refused above kMaxLoggedParticles
  bool keep_final = false;
};

inline constexpr std::size_t kMaxLoggedParticles = 100000;

struct Trajectory {
  Mode mode;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double T = 0;
  double total_mass = 0;
  std::vector<double> betas;
  std::vector<Record> records;
  std::vector<CollisionEvent> events;  // ordered by particle, then time
  ParticleEnsemble final_state;        // filled when keep_final
};

// Particles start at zeta = 1 with X = log rho drawn from G0 e^X. Records are
// taken at each record time in [0, T] (sorted, duplicates removed).
Trajectory simulate(std::size_t n, const toy::InitialProfile& profile, const Mode& mode, double T,
                    std::uint64_t seed, std::vector<double> record_times, const SimOptions& opt = {});

// Weighted mean of (rho zeta)^beta; SE from sqrt(n) batch means.
MomentEstimate empirical_moment(const ParticleEnsemble& e, double beta);

struct TraceReport {
  double a = 0;
  double fitted = 0;  // mean of t eps(t) over records in [T/10, T]
  double target = 0;  // 1 - a
  double se = 0;      // spread of those values / sqrt(count)
  int points = 0;
};

// Needs a self-consistent trajectory with at least 3 records in the last decade.
TraceReport epsilon_trace_check(const Trajectory& tr, double a);

// Summary CSV: t, mass, epsilon, collisions, moment_<beta>, se_<beta>.
void write_summary(std::ostream& os, const Trajectory& tr);
void write_summary(const std::filesystem::path& path, const Trajectory& tr);
void write_events(const std::filesystem::path& path, const Trajectory& tr);

int thread_count(int requested);

}  // namespace hdflow::mc
