#include "hdflow/toy_model_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>
#include <thread>

#include "hdflow/csv.hpp"
#include "hdflow/errors.hpp"

namespace hdflow::mc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// splitmix64 finalizer; streams are (seed, particle) keys walked by a counter.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t particle) {
  return mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^ (particle * 0xD1B54A32D192ED03ULL));
}

// Uniform on (0, 1].
double uniform(std::uint64_t key, std::uint64_t counter) {
  const std::uint64_t r = mix(key + counter * 0x9E3779B97F4A7C15ULL);
  return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

double exp_draw(std::uint64_t key, std::uint64_t counter) { return -std::log(uniform(key, counter)); }

// Running log-sum-exp so moments of rho zeta never overflow mid-sum.
struct Lse {
  double m = -kInf;
  double s = 0;
  void add(double v) {
    if (v <= m) {
      s += std::exp(v - m);
    } else {
      s = (m == -kInf) ? 1.0 : s * std::exp(m - v) + 1.0;
      m = v;
    }
  }
};

// Combines per-batch sums (batch b holds W[b] mass) into mean and SE.
MomentEstimate combine(double beta, const std::vector<Lse>& parts, const std::vector<double>& W) {
  MomentEstimate out;
  out.beta = beta;
  const std::size_t B = parts.size();
  double M = -kInf;
  for (const auto& p : parts) M = std::max(M, p.m);
  double Wt = 0, St = 0;
  std::vector<double> means(B);
  for (std::size_t b = 0; b < B; ++b) {
    const double sb = parts[b].m == -kInf ? 0.0 : parts[b].s * std::exp(parts[b].m - M);
    means[b] = W[b] > 0 ? sb / W[b] : 0.0;
    St += sb;
    Wt += W[b];
  }
  const double mean = St / Wt;
  double var = 0;
  if (B > 1) {
    for (std::size_t b = 0; b < B; ++b) {
      const double f = W[b] / Wt;
      var += f * f * (means[b] - mean) * (means[b] - mean);
    }
    var *= static_cast<double>(B) / static_cast<double>(B - 1);
  } else {
    var = std::numeric_limits<double>::quiet_NaN();
  }
  out.log_estimate = M + std::log(mean);
  out.rel_se = std::sqrt(var) / mean;
  out.estimate = std::exp(out.log_estimate);
  out.se = out.rel_se * out.estimate;
  return out;
}

std::size_t batch_count(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
}

std::size_t batch_begin(std::size_t b, std::size_t n, std::size_t B) { return b * n / B; }

template <class F>
void parallel_batches(std::size_t B, int threads, F&& fn) {
  if (threads <= 1 || B <= 1) {
    for (std::size_t b = 0; b < B; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < B; b = next++) fn(b);
  };
  std::vector<std::thread> pool;
  const int extra = static_cast<int>(std::min<std::size_t>(B, static_cast<std::size_t>(threads))) - 1;
  for (int k = 0; k < extra; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// Inverse CDF of G0(X) e^X on a fine grid; piecewise-constant density per cell.
class XSampler {
 public:
  explicit XSampler(const toy::InitialProfile& p) {
    constexpr int kCells = 1 << 16;
    auto [lo, hi] = p.support();
    auto dens = [&](double x) { return p(x) * std::exp(x); };
    // Trim to where the weighted density matters.
    double peak = 0;
    std::vector<double> probe(kCells + 1);
    for (int i = 0; i <= kCells; ++i) {
      probe[i] = dens(lo + (hi - lo) * i / kCells);
      peak = std::max(peak, probe[i]);
    }
    if (!(peak > 0) || !std::isfinite(peak)) throw InvalidArgument("profile has no finite positive mass");
    int a = 0, b = kCells;
    while (a < kCells && probe[a] < 1e-18 * peak) ++a;
    while (b > 0 && probe[b] < 1e-18 * peak) --b;
    const double nlo = lo + (hi - lo) * std::max(a - 1, 0) / kCells;
    const double nhi = lo + (hi - lo) * std::min(b + 1, kCells) / kCells;
    x_.resize(kCells + 1);
    cdf_.resize(kCells + 1);
    double prev = dens(nlo);
    x_[0] = nlo;
    cdf_[0] = 0;
    for (int i = 1; i <= kCells; ++i) {
      x_[i] = nlo + (nhi - nlo) * i / kCells;
      const double d = dens(x_[i]);
      cdf_[i] = cdf_[i - 1] + 0.5 * (prev + d) * (x_[i] - x_[i - 1]);
      prev = d;
    }
    for (auto& c : cdf_) c /= cdf_.back();
  }

  double operator()(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    if (i == 0) return x_[0];
    if (i >= cdf_.size()) return x_.back();
    const double span = cdf_[i] - cdf_[i - 1];
    const double f = span > 0 ? (u - cdf_[i - 1]) / span : 0.5;
    return x_[i - 1] + f * (x_[i] - x_[i - 1]);
  }

 private:
  std::vector<double> x_, cdf_;
};

// Rate on the current interval: eps0 + slope (t - t0).
struct Segment {
  double t0, t1, eps0, slope;
  double rate(double t) const { return eps0 + slope * (t - t0); }
  double hazard(double from) const {
    const double d = t1 - from;
    return rate(from) * d + 0.5 * slope * d * d;
  }
  // Time after `from` at which the hazard reaches E (E <= hazard(from)).
  double invert(double from, double E) const {
    const double r = rate(from);
    if (slope == 0) return E / r;
    const double disc = std::max(0.0, r * r + 2 * slope * E);
    return 2 * E / (r + std::sqrt(disc));
  }
};

std::string beta_label(double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", b);
  return buf;
}

}  // namespace

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HDFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw InvalidArgument(std::string("HDFLOW_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

Trajectory simulate(std::size_t n, const toy::InitialProfile& profile, const Mode& mode, double T,
                    std::uint64_t seed, std::vector<double> record_times, const SimOptions& opt) {
  if (n == 0) throw InvalidArgument("need at least one particle");
  if (!(T >= 0) || !std::isfinite(T)) throw InvalidArgument("T must be finite and >= 0");
  const bool sc = mode.kind == Mode::Kind::SelfConsistent;
  if (sc && !(mode.a > 0 && mode.a < 1)) throw InvalidArgument("self-consistent mode needs a in (0, 1)");
  if (!sc && !(mode.epsilon >= 0 && std::isfinite(mode.epsilon)))
    throw InvalidArgument("constant epsilon must be finite and >= 0");
  for (double b : opt.betas)
    if (!std::isfinite(b)) throw InvalidArgument("moment orders must be finite");
  if (!(opt.sync_fraction > 0) || !(opt.sync_floor > 0)) throw InvalidArgument("sync interval must be positive");
  if (opt.event_log && n > kMaxLoggedParticles)
    throw ResourceLimit("event log is limited to " + std::to_string(kMaxLoggedParticles) + " particles");
  std::sort(record_times.begin(), record_times.end());
  record_times.erase(std::unique(record_times.begin(), record_times.end()), record_times.end());
  for (double r : record_times)
    if (!(r >= 0 && r <= T)) throw InvalidArgument("record times must lie in [0, T]");

  const int threads = thread_count(opt.threads);
  const std::size_t B = batch_count(n);

  Trajectory tr;
  tr.mode = mode;
  tr.n = n;
  tr.seed = seed;
  tr.T = T;
  tr.betas = opt.betas;
  tr.total_mass = static_cast<double>(n);

  std::vector<double> X(n), tau(n, 0.0), E(n);
  std::vector<std::uint64_t> ctr(n, 1);
  {
    const XSampler sample(profile);
    parallel_batches(B, threads, [&](std::size_t b) {
      for (std::size_t i = batch_begin(b, n, B); i < batch_begin(b + 1, n, B); ++i) {
        const auto key = stream_key(seed, i);
        X[i] = sample(uniform(key, 0));
        E[i] = exp_draw(key, 1);
      }
    });
  }

  // Per-batch outputs, merged in batch order.
  const std::size_t nb = opt.betas.size();
  std::vector<std::vector<Lse>> mom(nb, std::vector<Lse>(B));
  std::vector<Lse> epsacc(B);
  std::vector<double> wsum(B);
  std::vector<std::uint64_t> coll(B, 0);
  std::vector<std::vector<CollisionEvent>> events(opt.event_log ? B : 0);
  std::uint64_t collisions = 0;

  // Advance every particle over seg (if any) and accumulate stats at seg.t1.
  auto pass = [&](const Segment* seg, double t, bool want_eps, bool want_moments) {
    parallel_batches(B, threads, [&](std::size_t b) {
      Lse eacc;
      std::vector<Lse> macc(want_moments ? nb : 0);
      double w = 0;
      std::uint64_t c = 0;
      for (std::size_t i = batch_begin(b, n, B); i < batch_begin(b + 1, n, B); ++i) {
        if (seg) {
          double from = seg->t0;
          double left = seg->hazard(from);
          while (E[i] <= left) {
            const double tc = std::min(seg->t1, from + seg->invert(from, E[i]));
            const double zeta = 1.0 + (tc - tau[i]);
            const double before = X[i];
            X[i] += std::log(zeta);
            tau[i] = tc;
            if (opt.event_log) events[b].push_back({tc, i, before, zeta, X[i]});
            left = seg->hazard(tc);
            from = tc;
            E[i] = exp_draw(stream_key(seed, i), ++ctr[i]);
            ++c;
          }
          E[i] -= left;
        }
        if (want_eps || want_moments) {
          const double y = X[i] + std::log(1.0 + (t - tau[i]));
          if (want_eps) eacc.add(-mode.a * y);
          for (std::size_t k = 0; k < macc.size(); ++k) macc[k].add(opt.betas[k] * y);
          w += 1.0;
        }
      }
      coll[b] = c;
      wsum[b] = w;
      if (want_eps) epsacc[b] = eacc;
      for (std::size_t k = 0; k < macc.size(); ++k) mom[k][b] = macc[k];
    });
    for (std::size_t b = 0; b < B; ++b) collisions += coll[b];
  };

  auto ensemble_eps = [&]() { return combine(-mode.a, epsacc, wsum).estimate; };

  auto take_record = [&](double t, double eps) {
    Record r;
    r.t = t;
    r.mass = 0;
    for (std::size_t b = 0; b < B; ++b) r.mass += wsum[b];
    r.epsilon = eps;
    r.collisions = collisions;
    for (std::size_t k = 0; k < nb; ++k) r.moments.push_back(combine(opt.betas[k], mom[k], wsum));
    tr.records.push_back(std::move(r));
  };

  std::size_t next_rec = 0;
  const bool rec0 = !record_times.empty() && record_times[0] == 0;
  pass(nullptr, 0.0, sc, rec0);
  double eps_now = sc ? ensemble_eps() : mode.epsilon;
  double eps_prev = eps_now, t_prev = 0;
  bool have_prev = false;
  if (rec0) {
    take_record(0, eps_now);
    ++next_rec;
  }

  double t = 0;
  while (t < T) {
    const double rec_t = next_rec < record_times.size() ? record_times[next_rec] : T;
    double t1 = rec_t;
    if (sc) t1 = std::min(t1, t + std::max(opt.sync_floor, opt.sync_fraction * t));
    t1 = std::min(t1, T);
    Segment seg{t, t1, eps_now, 0.0};
    if (sc && have_prev) {
      // Linear extrapolation from the last two refreshes; fall back to a
      // constant if it would more than halve the rate on this interval.
      const double s = (eps_now - eps_prev) / (t - t_prev);
      if (eps_now + s * (t1 - t) >= 0.5 * eps_now) seg.slope = s;
    }
    const bool is_rec = next_rec < record_times.size() && t1 == record_times[next_rec];
    pass(&seg, t1, sc, is_rec);
    if (sc) {
      eps_prev = eps_now;
      t_prev = t;
      have_prev = true;
      eps_now = ensemble_eps();
    }
    t = t1;
    if (is_rec) {
      take_record(t, eps_now);
      ++next_rec;
    }
  }

  if (opt.event_log) {
    for (auto& v : events) tr.events.insert(tr.events.end(), v.begin(), v.end());
    std::stable_sort(tr.events.begin(), tr.events.end(), [](const CollisionEvent& p, const CollisionEvent& q) {
      return p.particle != q.particle ? p.particle < q.particle : p.t < q.t;
    });
  }
  if (opt.keep_final) {
    auto& f = tr.final_state;
    f.log_rho = X;
    f.zeta.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.zeta[i] = 1.0 + (T - tau[i]);
    f.weight.assign(n, 1.0);
    f.t = T;
    f.seed = seed;
    f.total_mass = static_cast<double>(n);
  }
  return tr;
}

MomentEstimate empirical_moment(const ParticleEnsemble& e, double beta) {
  const std::size_t n = e.size();
  if (n == 0) throw InvalidArgument("empty ensemble");
  if (e.zeta.size() != n || e.weight.size() != n) throw InvalidArgument("ensemble arrays differ in length");
  const std::size_t B = batch_count(n);
  std::vector<Lse> parts(B);
  std::vector<double> W(B, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = batch_begin(b, n, B); i < batch_begin(b + 1, n, B); ++i) {
      if (e.weight[i] <= 0) continue;
      parts[b].add(std::log(e.weight[i]) + beta * (e.log_rho[i] + std::log(e.zeta[i])));
      W[b] += e.weight[i];
    }
  }
  return combine(beta, parts, W);
}

TraceReport epsilon_trace_check(const Trajectory& tr, double a) {
  if (tr.mode.kind != Mode::Kind::SelfConsistent) throw InvalidArgument("trace check needs a self-consistent run");
  if (!(a > 0 && a < 1)) throw InvalidArgument("a must lie in (0, 1)");
  const double T = tr.records.empty() ? 0 : tr.records.back().t;
  std::vector<double> v;
  for (const auto& r : tr.records)
    if (r.t >= 0.1 * T && r.t > 0) v.push_back(r.t * r.epsilon);
  if (v.size() < 3) throw InvalidArgument("need at least 3 records in the last decade");
  TraceReport rep;
  rep.a = a;
  rep.target = 1 - a;
  rep.points = static_cast<int>(v.size());
  double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  rep.fitted = m;
  rep.se = std::sqrt(ss / (v.size() - 1) / v.size());
  return rep;
}

namespace {
void summary_table(const Trajectory& tr, std::vector<std::string>& header, std::vector<std::vector<double>>& rows) {
  header = {"t", "mass", "epsilon", "collisions"};
  for (double b : tr.betas) header.push_back("moment_" + beta_label(b));
  for (double b : tr.betas) header.push_back("se_" + beta_label(b));
  for (const auto& r : tr.records) {
    std::vector<double> row{r.t, r.mass, r.epsilon, static_cast<double>(r.collisions)};
    for (const auto& m : r.moments) row.push_back(m.estimate);
    for (const auto& m : r.moments) row.push_back(m.se);
    rows.push_back(std::move(row));
  }
}
}  // namespace

void write_summary(std::ostream& os, const Trajectory& tr) {
  std::vector<std::string> h;
  std::vector<std::vector<double>> rows;
  summary_table(tr, h, rows);
  csv::write(os, h, rows);
}

void write_summary(const std::filesystem::path& path, const Trajectory& tr) {
  std::vector<std::string> h;
  std::vector<std::vector<double>> rows;
  summary_table(tr, h, rows);
  csv::write(path, h, rows);
}

void write_events(const std::filesystem::path& path, const Trajectory& tr) {
  std::vector<std::vector<double>> rows;
  rows.reserve(tr.events.size());
  for (const auto& e : tr.events)
    rows.push_back({e.t, static_cast<double>(e.particle), e.log_rho_before, e.zeta_before, e.log_rho_after});
  csv::write(path, {"t", "particle", "log_rho_before", "zeta_before", "log_rho_after"}, rows);
}

}  // namespace hdflow::mc
