#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "thermal/hamiltonian.hpp"
#include "thermal/types.hpp"

namespace thermal {

enum class Boundary { Open, Periodic };

// Discretized Euclidean action setup: beta = 1/T split into n_slices links of
// spacing a = beta / n_slices.
struct ActionConfig {
  double beta = 10.0;
  int n_slices = 32;
  Potential potential;
  Boundary boundary = Boundary::Open;

  double lattice_spacing() const { return beta / n_slices; }
  // Open paths carry both endpoints as free coordinates; periodic paths wrap.
  int path_dimension() const { return boundary == Boundary::Open ? n_slices + 1 : n_slices; }
};

using EuclideanPath = Vector;

struct StepStats {
  long proposed = 0;
  long accepted = 0;
  double acceptance_rate() const { return proposed > 0 ? double(accepted) / proposed : 0.0; }
};

// Walker columns evolve under affine-invariant stretch moves. Per-walker
// counter-based RNG streams make the result independent of the parallel
// schedule.
struct PathEnsemble {
  Matrix walkers;  // D x W
  Vector actions;  // cached S_E per walker
  std::uint64_t seed = 0;
  long sweep_index = 0;
  StepStats stats;

  int n_walkers() const { return static_cast<int>(walkers.cols()); }
};

// S_E = sum_links [ (q_z - q_{z-1})^2 / (2a) + a V((q_z + q_{z-1}) / 2) ];
// periodic paths include the wraparound link.
double discrete_action(const ActionConfig& cfg, const EuclideanPath& path);

// Action change from setting position z to new_q, through the (at most) two
// adjacent links only.
double delta_action_single_slice(const ActionConfig& cfg, const EuclideanPath& path, int z,
                                 double new_q);

// Walkers start as i.i.d. Gaussian paths of unit slice variance centered at
// the potential's global minimum. n_walkers = 0 picks 4 * path dimension.
PathEnsemble init_ensemble(const ActionConfig& cfg, std::uint64_t seed, int n_walkers = 0);

// One full Goodman-Weare sweep (both half-ensembles): each walker proposes
// q' = q_c + z (q - q_c) against a partner q_c from the frozen complementary
// half, with z ~ 1/sqrt(z) on [1/a_stretch, a_stretch], accepted with
// probability min(1, z^(d-1) e^(-dS)).
void stretch_move(PathEnsemble& ensemble, const ActionConfig& cfg, double a_stretch = 2.0);

struct OpenSamples {
  Matrix endpoints;  // n x 2, rows (x_i, y_i) = (q(0), q(beta))
  StepStats stats;
  long sweeps = 0;
};

// n_paths draws with unnormalized density e^(-S_E) over the full open-path
// state; the count is rounded up to a whole number of harvests (all walkers
// are retained every `thin` sweeps). High-dimensional paths equilibrate much
// faster with a_stretch near 1.3 than with the classic 2.0.
OpenSamples sample_open_paths(const ActionConfig& cfg, long n_paths, long burn_in, long thin,
                              std::uint64_t seed, double a_stretch = 2.0);

// Streaming variant for periodic paths; sink receives each retained path.
void for_each_periodic_path(const ActionConfig& cfg, long n_paths, long burn_in, long thin,
                            std::uint64_t seed, const std::function<void(const EuclideanPath&)>& sink,
                            StepStats* stats_out = nullptr, double a_stretch = 2.0);

std::vector<EuclideanPath> sample_periodic_paths(const ActionConfig& cfg, long n_paths, long burn_in,
                                                 long thin, std::uint64_t seed,
                                                 double a_stretch = 2.0);

}  // namespace thermal
