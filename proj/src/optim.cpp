#include "thermal/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace thermal {

AdamState::AdamState(Eigen::Index n_params, AdamConfig cfg) : config(cfg) {
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw std::invalid_argument("adam betas must lie in [0, 1)");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
  first_moment = Vector::Zero(n_params);
  second_moment = Vector::Zero(n_params);
}

void adam_step(AdamState& state, Vector& params, const Vector& grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw std::invalid_argument("adam: parameter/gradient shape mismatch");
  if (!grads.allFinite()) throw std::runtime_error("diverged");

  const AdamConfig& c = state.config;
  ++state.step_count;
  state.first_moment = c.beta1 * state.first_moment + (1.0 - c.beta1) * grads;
  state.second_moment =
      c.beta2 * state.second_moment.array() + (1.0 - c.beta2) * grads.array().square();
  const double m_corr = 1.0 - std::pow(c.beta1, state.step_count);
  const double v_corr = 1.0 - std::pow(c.beta2, state.step_count);
  params.array() -= c.learning_rate * (state.first_moment.array() / m_corr) /
                    ((state.second_moment.array() / v_corr).sqrt() + c.epsilon);
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& loss, Vector params,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  Vector grad(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss(params);
    params[i] = saved - h;
    const double down = loss(params);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace thermal
