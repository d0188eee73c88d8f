#pragma once

#include <functional>

#include "thermal/types.hpp"

namespace thermal {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  long step_count = 0;
  AdamConfig config;

  explicit AdamState(Eigen::Index n_params = 0, AdamConfig cfg = {});
};

// Standard bias-corrected Adam update, in place. Rejects shape mismatches and
// non-finite gradients ("diverged").
void adam_step(AdamState& state, Vector& params, const Vector& grads);

// Central-difference gradient estimate.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& loss, Vector params,
                            double h = 1e-5);

}  // namespace thermal
