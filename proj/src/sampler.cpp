#include "thermal/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "thermal/parallel.hpp"

namespace thermal {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform draw in (0, 1), keyed on (seed, purpose, a, b, c). The same key
// always yields the same value, so walkers can be updated in any order or in
// parallel without changing the stream.
double u01(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a, std::uint64_t b,
           std::uint64_t c) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ purpose);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return (static_cast<double>(h >> 12) + 0.5) * 0x1.0p-52;
}

constexpr std::uint64_t kPurposeInit = 0;
constexpr std::uint64_t kPurposeSweep = 1;

double standard_normal(std::uint64_t seed, std::uint64_t walker, std::uint64_t slice) {
  const double u1 = u01(seed, kPurposeInit, walker, slice, 0);
  const double u2 = u01(seed, kPurposeInit, walker, slice, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double link_action(const ActionConfig& cfg, double q_prev, double q_next) {
  const double a = cfg.lattice_spacing();
  const double d = q_next - q_prev;
  return d * d / (2.0 * a) + a * potential_eval(cfg.potential, (q_next + q_prev) / 2.0);
}

void check_path_length(const ActionConfig& cfg, const EuclideanPath& path) {
  if (path.size() != cfg.path_dimension())
    throw std::invalid_argument("path length does not match the action config");
}

}  // namespace

double discrete_action(const ActionConfig& cfg, const EuclideanPath& path) {
  check_path_length(cfg, path);
  const int n = static_cast<int>(path.size());
  double s = 0.0;
  for (int z = 1; z < n; ++z) s += link_action(cfg, path[z - 1], path[z]);
  if (cfg.boundary == Boundary::Periodic) s += link_action(cfg, path[n - 1], path[0]);
  return s;
}

double delta_action_single_slice(const ActionConfig& cfg, const EuclideanPath& path, int z,
                                 double new_q) {
  check_path_length(cfg, path);
  const int n = static_cast<int>(path.size());
  if (z < 0 || z >= n) throw std::invalid_argument("slice index out of range");
  const bool periodic = cfg.boundary == Boundary::Periodic;
  double delta = 0.0;
  if (z > 0 || periodic) {
    const double prev = path[(z - 1 + n) % n];
    delta += link_action(cfg, prev, new_q) - link_action(cfg, prev, path[z]);
  }
  if (z < n - 1 || periodic) {
    const double next = path[(z + 1) % n];
    delta += link_action(cfg, new_q, next) - link_action(cfg, path[z], next);
  }
  return delta;
}

PathEnsemble init_ensemble(const ActionConfig& cfg, std::uint64_t seed, int n_walkers) {
  const int d = cfg.path_dimension();
  if (n_walkers == 0) n_walkers = 4 * d;
  if (n_walkers % 2 != 0) throw std::invalid_argument("walker count must be even");
  if (n_walkers < 2 * d) throw std::invalid_argument("walker count must be >= twice the path dimension");

  const double center = potential_minimum_location(cfg.potential);
  PathEnsemble ensemble;
  ensemble.seed = seed;
  ensemble.walkers.resize(d, n_walkers);
  ensemble.actions.resize(n_walkers);
  for (int w = 0; w < n_walkers; ++w) {
    for (int z = 0; z < d; ++z) ensemble.walkers(z, w) = center + standard_normal(seed, w, z);
    ensemble.actions[w] = discrete_action(cfg, ensemble.walkers.col(w));
  }
  return ensemble;
}

void stretch_move(PathEnsemble& ensemble, const ActionConfig& cfg, double a_stretch) {
  const int w_total = ensemble.n_walkers();
  if (w_total % 2 != 0) throw std::invalid_argument("walker count must be even");
  if (!(a_stretch > 1.0)) throw std::invalid_argument("stretch parameter must exceed 1");
  const int d = cfg.path_dimension();
  if (ensemble.walkers.rows() != d)
    throw std::invalid_argument("ensemble dimension does not match the action config");

  const int half = w_total / 2;
  const std::uint64_t sweep = static_cast<std::uint64_t>(ensemble.sweep_index);
  std::vector<char> accepted(w_total, 0);

  for (int phase = 0; phase < 2; ++phase) {
    const int lo = phase * half;
    const int partner_lo = (1 - phase) * half;
    parallel_for(static_cast<std::size_t>(half), [&](std::size_t i) {
      const int w = lo + static_cast<int>(i);
      const std::uint64_t key = 2 * sweep + phase;
      const double u_partner = u01(ensemble.seed, kPurposeSweep, key, w, 0);
      const int partner = partner_lo + std::min<int>(half - 1, static_cast<int>(u_partner * half));
      const double u_z = u01(ensemble.seed, kPurposeSweep, key, w, 1);
      const double t = (a_stretch - 1.0) * u_z + 1.0;
      const double z = t * t / a_stretch;

      Vector proposal = ensemble.walkers.col(partner) +
                        z * (ensemble.walkers.col(w) - ensemble.walkers.col(partner));
      const double s_new = discrete_action(cfg, proposal);
      const double log_accept = (d - 1) * std::log(z) - (s_new - ensemble.actions[w]);
      const double u_acc = u01(ensemble.seed, kPurposeSweep, key, w, 2);
      if (std::log(u_acc) < log_accept) {
        ensemble.walkers.col(w) = proposal;
        ensemble.actions[w] = s_new;
        accepted[w] = 1;
      }
    });
  }

  ensemble.sweep_index++;
  ensemble.stats.proposed += w_total;
  for (const char a : accepted) ensemble.stats.accepted += a;
}

namespace {

// Shared burn-in/thin/harvest loop; harvest(ensemble) is called once per
// retained sweep until total_harvests have been taken.
template <class Harvest>
StepStats run_chain(const ActionConfig& cfg, long n_harvests, long burn_in, long thin,
                    std::uint64_t seed, double a_stretch, Harvest&& harvest) {
  if (thin < 1) thin = 1;
  PathEnsemble ensemble = init_ensemble(cfg, seed);
  for (long s = 0; s < burn_in; ++s) stretch_move(ensemble, cfg, a_stretch);
  for (long h = 0; h < n_harvests; ++h) {
    for (long s = 0; s < thin; ++s) stretch_move(ensemble, cfg, a_stretch);
    harvest(ensemble);
  }
  return ensemble.stats;
}

}  // namespace

OpenSamples sample_open_paths(const ActionConfig& cfg, long n_paths, long burn_in, long thin,
                              std::uint64_t seed, double a_stretch) {
  if (cfg.boundary != Boundary::Open) throw std::invalid_argument("open-path sampling needs Open boundary");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  const int w = 4 * cfg.path_dimension();
  // Rounded up to a whole number of harvests of the full ensemble.
  const long harvests = (n_paths + w - 1) / w;

  OpenSamples out;
  out.endpoints.resize(harvests * w, 2);
  long row = 0;
  out.stats = run_chain(cfg, harvests, burn_in, thin, seed, a_stretch, [&](const PathEnsemble& ensemble) {
    for (int i = 0; i < w; ++i) {
      out.endpoints(row, 0) = ensemble.walkers(0, i);
      out.endpoints(row, 1) = ensemble.walkers(cfg.n_slices, i);
      ++row;
    }
  });
  out.sweeps = burn_in + harvests * std::max<long>(thin, 1);
  return out;
}

void for_each_periodic_path(const ActionConfig& cfg, long n_paths, long burn_in, long thin,
                            std::uint64_t seed, const std::function<void(const EuclideanPath&)>& sink,
                            StepStats* stats_out, double a_stretch) {
  if (cfg.boundary != Boundary::Periodic)
    throw std::invalid_argument("periodic-path sampling needs Periodic boundary");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  const int w = 4 * cfg.path_dimension();
  const long harvests = (n_paths + w - 1) / w;
  const StepStats stats = run_chain(cfg, harvests, burn_in, thin, seed, a_stretch, [&](const PathEnsemble& ensemble) {
    for (int i = 0; i < w; ++i) sink(ensemble.walkers.col(i));
  });
  if (stats_out != nullptr) *stats_out = stats;
}

std::vector<EuclideanPath> sample_periodic_paths(const ActionConfig& cfg, long n_paths, long burn_in,
                                                 long thin, std::uint64_t seed, double a_stretch) {
  std::vector<EuclideanPath> paths;
  for_each_periodic_path(
      cfg, n_paths, burn_in, thin, seed, [&](const EuclideanPath& p) { paths.push_back(p); },
      nullptr, a_stretch);
  return paths;
}

}  // namespace thermal
