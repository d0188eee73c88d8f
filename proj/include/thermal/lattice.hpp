#pragma once

#include <vector>

#include "thermal/sampler.hpp"
#include "thermal/types.hpp"

namespace thermal {

struct CorrelatorEstimate {
  Vector taus;    // lattice times z * a, z = 0..N-1
  Vector values;  // C(tau_z)
  Vector errors;  // jackknife, per point
  long n_samples = 0;
  double beta = 0.0;
};

struct CoshFit {
  double a_coeff = 0.0;
  double b_coeff = 0.0;
  double delta_e = 0.0;
  double delta_e_error = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // (A, B, dE)
  bool ambiguous = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

// Streaming correlator accumulator with contiguous block jackknife over MCMC
// order. The expected path count fixes the block boundaries up front.
class CorrelatorAccumulator {
 public:
  CorrelatorAccumulator(int n_slices, double beta, long expected_paths, int n_blocks = 50);

  void add(const EuclideanPath& path);
  CorrelatorEstimate finalize() const;  // needs >= 100 paths

 private:
  int n_slices_;
  double beta_;
  long expected_paths_;
  long n_seen_ = 0;
  Matrix block_sums_;  // n_slices x n_blocks
  Vector block_counts_;
};

// C(tau_z) = < q(tau_0) q(tau_z) >, averaged over the ensemble and over
// translations around the time circle.
CorrelatorEstimate estimate_correlator(const std::vector<EuclideanPath>& paths, double beta,
                                       int n_blocks = 50);

// Chi-square fit of C(tau) = A cosh[dE (tau - beta/2)] + B over the window:
// dE is profiled (scan + golden-section refine) with (A, B) solved by
// weighted linear least squares at each dE; covariance from the local
// quadratic shape of chi2.
CoshFit fit_delta_e(const CorrelatorEstimate& corr, double tau_min, double tau_max);

}  // namespace thermal
