#include "thermal/qml.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "thermal/hamiltonian.hpp"

namespace thermal {

namespace {

void check_vdm(const VariationalDensityMatrix& vdm) {
  if (vdm.weights.logits.size() != vdm.coefficients.cols())
    throw std::invalid_argument("logit/coefficient dimension mismatch");
  if (vdm.coefficients.rows() != vdm.basis.size)
    throw std::invalid_argument("basis/coefficient dimension mismatch");
}

// Endpoint-side evaluation shared by loss and gradient: values (and for flows
// the pieces of d psi~ / dC) at one set of points.
struct PointEval {
  Matrix values;  // n_pts x N, psi~_n
  Matrix mix;     // n_pts x N, chi_n(f(x)) raw mixture (flow only)
  Matrix dmix;    // n_pts x N, chi_n'(f(x)) (flow only)
  Vector sqrt_g;  // n_pts (flow only)
};

PointEval evaluate_states(const VariationalDensityMatrix& vdm, const Vector& pts,
                          bool need_flow_pieces) {
  PointEval out;
  if (!vdm.flow) {
    out.values = basis_values(vdm.basis, pts).transpose() * vdm.coefficients;
    return out;
  }
  const Eigen::Index n_pts = pts.size();
  Vector fx(n_pts), g(n_pts);
  for (Eigen::Index i = 0; i < n_pts; ++i) {
    fx[i] = flow_forward(*vdm.flow, pts[i]);
    g[i] = flow_derivative(*vdm.flow, pts[i]);
  }
  out.sqrt_g = g.array().sqrt();
  const Matrix b = basis_values(vdm.basis, fx);
  out.mix = b.transpose() * vdm.coefficients;
  out.values = out.mix.array().colwise() * out.sqrt_g.array();
  if (need_flow_pieces) out.dmix = basis_derivatives(vdm.basis, fx).transpose() * vdm.coefficients;
  return out;
}

Vector log_weight_ratios(const VariationalDensityMatrix& vdm, double p_perp) {
  const Vector p = softmax_weights(vdm.weights.logits);
  return (p.array() / p_perp).log();
}

}  // namespace

double state_amplitude(const VariationalDensityMatrix& vdm, int n, double x) {
  check_vdm(vdm);
  if (n < 0 || n >= vdm.n_states()) throw std::invalid_argument("state index out of range");
  Vector pts(1);
  pts[0] = x;
  return evaluate_states(vdm, pts, false).values(0, n);
}

QmlTerms qml_empirical_loss(const VariationalDensityMatrix& vdm, const Matrix& endpoints,
                            double c_perp, double p_perp) {
  check_vdm(vdm);
  if (!(p_perp > 0.0)) throw std::invalid_argument("p_perp must be positive");
  QmlTerms terms;
  terms.complement = -std::log(p_perp);
  terms.penalty = c_perp * orthogonality_penalty(vdm.coefficients);
  if (endpoints.rows() > 0) {
    const Matrix sx = evaluate_states(vdm, endpoints.col(0), false).values;
    const Matrix sy = evaluate_states(vdm, endpoints.col(1), false).values;
    const Vector proj_mean = (sx.array() * sy.array()).colwise().mean();
    terms.projection = -log_weight_ratios(vdm, p_perp).dot(proj_mean);
  }
  terms.total = terms.complement + terms.projection + terms.penalty;
  if (!std::isfinite(terms.total)) throw std::runtime_error("diverged");
  return terms;
}

QmlGradients qml_gradient(const VariationalDensityMatrix& vdm, const Matrix& endpoints,
                          double c_perp, double p_perp) {
  check_vdm(vdm);
  if (!(p_perp > 0.0)) throw std::invalid_argument("p_perp must be positive");
  const bool has_flow = vdm.flow.has_value();
  const Eigen::Index n_pts = endpoints.rows();

  QmlGradients grads;
  grads.coefficients = c_perp * orthogonality_penalty_gradient(vdm.coefficients);
  grads.logits = Vector::Zero(vdm.n_states());
  if (has_flow) grads.flow = Vector::Zero(vdm.flow->node_count());
  if (n_pts == 0) return grads;

  const Vector xs = endpoints.col(0);
  const Vector ys = endpoints.col(1);
  const PointEval ex = evaluate_states(vdm, xs, has_flow);
  const PointEval ey = evaluate_states(vdm, ys, has_flow);
  const Vector w = log_weight_ratios(vdm, p_perp);
  const Vector p = softmax_weights(vdm.weights.logits);
  const double inv_n = 1.0 / static_cast<double>(n_pts);

  const Vector proj_mean = (ex.values.array() * ey.values.array()).colwise().mean();
  // d log p_n / d l_k = delta_{nk} - p_k.
  grads.logits = -(proj_mean.array() - p.array() * proj_mean.sum());

  // Basis (or flowed-basis) values at the endpoints for the coefficient
  // gradient.
  Matrix bx, by;
  if (has_flow) {
    Vector fx(n_pts), fy(n_pts);
    for (Eigen::Index i = 0; i < n_pts; ++i) {
      fx[i] = flow_forward(*vdm.flow, xs[i]);
      fy[i] = flow_forward(*vdm.flow, ys[i]);
    }
    bx = (basis_values(vdm.basis, fx).array().rowwise() * ex.sqrt_g.transpose().array()).transpose();
    by = (basis_values(vdm.basis, fy).array().rowwise() * ey.sqrt_g.transpose().array()).transpose();
  } else {
    bx = basis_values(vdm.basis, xs).transpose();
    by = basis_values(vdm.basis, ys).transpose();
  }
  grads.coefficients.noalias() -=
      inv_n * (bx.transpose() * (ey.values * w.asDiagonal()) +
               by.transpose() * (ex.values * w.asDiagonal()));

  if (has_flow) {
    // d psi~_n(u)/dC_i = chi_n'(f(u)) sqrt(g) tanh(u - x_i)
    //                  + chi_n(f(u)) sech^2(u - x_i) / (2 sqrt(g)).
    const Vector alpha_x =
        ((ex.dmix.array().colwise() * ex.sqrt_g.array()) * ey.values.array()).matrix() * w;
    const Vector beta_x =
        ((ex.mix.array().colwise() / (2.0 * ex.sqrt_g.array())) * ey.values.array()).matrix() * w;
    const Vector alpha_y =
        ((ey.dmix.array().colwise() * ey.sqrt_g.array()) * ex.values.array()).matrix() * w;
    const Vector beta_y =
        ((ey.mix.array().colwise() / (2.0 * ey.sqrt_g.array())) * ex.values.array()).matrix() * w;
    const int n_flow = vdm.flow->node_count();
    for (int i = 0; i < n_flow; ++i) {
      const double node = vdm.flow->node(i);
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n_pts; ++k) {
        const double tx = std::tanh(xs[k] - node);
        const double ty = std::tanh(ys[k] - node);
        acc += alpha_x[k] * tx + beta_x[k] * (1.0 - tx * tx);
        acc += alpha_y[k] * ty + beta_y[k] * (1.0 - ty * ty);
      }
      grads.flow[i] = -inv_n * acc;
    }
  }
  return grads;
}

BatchSource bank_batch_source(Matrix bank, std::uint64_t seed) {
  if (bank.rows() < 1 || bank.cols() != 2) throw std::invalid_argument("endpoint bank must be n x 2");
  struct State {
    Matrix bank;
    std::vector<Eigen::Index> order;
    Eigen::Index cursor = 0;
    std::mt19937_64 rng;
  };
  auto state = std::make_shared<State>();
  state->bank = std::move(bank);
  state->order.resize(state->bank.rows());
  std::iota(state->order.begin(), state->order.end(), 0);
  state->rng.seed(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(state->order.begin(), state->order.end(), state->rng);
  return [state](int batch_size) {
    Matrix batch(batch_size, 2);
    for (int i = 0; i < batch_size; ++i) {
      if (state->cursor >= static_cast<Eigen::Index>(state->order.size())) {
        std::shuffle(state->order.begin(), state->order.end(), state->rng);
        state->cursor = 0;
      }
      batch.row(i) = state->bank.row(state->order[state->cursor++]);
    }
    return batch;
  };
}

BatchSource online_batch_source(const ActionConfig& cfg, long burn_in, long thin,
                                std::uint64_t seed, double a_stretch) {
  if (cfg.boundary != Boundary::Open) throw std::invalid_argument("online source needs Open boundary");
  struct State {
    ActionConfig cfg;
    PathEnsemble ensemble;
    long thin;
    double a_stretch;
  };
  auto state = std::make_shared<State>();
  state->cfg = cfg;
  state->thin = std::max<long>(1, thin);
  state->a_stretch = a_stretch;
  state->ensemble = init_ensemble(cfg, seed);
  for (long s = 0; s < burn_in; ++s) stretch_move(state->ensemble, cfg, a_stretch);
  return [state](int batch_size) {
    const int w = state->ensemble.n_walkers();
    Matrix batch(batch_size, 2);
    int row = 0;
    while (row < batch_size) {
      for (long s = 0; s < state->thin; ++s)
        stretch_move(state->ensemble, state->cfg, state->a_stretch);
      for (int i = 0; i < w && row < batch_size; ++i, ++row) {
        batch(row, 0) = state->ensemble.walkers(0, i);
        batch(row, 1) = state->ensemble.walkers(state->cfg.n_slices, i);
      }
    }
    return batch;
  };
}

SpectrumResult train_qml(const QmlConfig& cfg, const BatchSource& batches, std::uint64_t seed,
                         const QmlLogSink& log_sink, const QmlCheckpointSink& checkpoint_sink) {
  const int m = cfg.basis.size;
  const int n = cfg.n_states;
  if (n < 1 || n > m) throw std::invalid_argument("need 1 <= n_states <= basis size");
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(cfg.p_perp > 0.0)) throw std::invalid_argument("p_perp must be positive");

  const bool has_flow = cfg.family != QmlFamily::HermiteMixture;
  const bool learn_mixing = cfg.family != QmlFamily::FlowOnly;

  VariationalDensityMatrix vdm;
  vdm.basis = cfg.basis;
  vdm.weights.temperature = 1.0 / cfg.beta;
  vdm.weights.p_perp = cfg.p_perp;
  vdm.weights.logits.setZero(n);
  for (int k = 0; k < n; ++k) vdm.weights.logits[k] = -double(k);

  vdm.coefficients.setZero(m, n);
  for (int k = 0; k < n; ++k) vdm.coefficients(k, k) = 1.0;
  if (learn_mixing) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k) vdm.coefficients(j, k) += cfg.init_noise * noise(rng);
    vdm.coefficients = normalize_columns(vdm.coefficients);
  }

  if (has_flow)
    vdm.flow = FlowMap::identity_init(cfg.flow_variant, cfg.flow_lo, cfg.flow_hi, cfg.flow_nodes);
  const int n_flow = has_flow ? vdm.flow->node_count() : 0;
  const int n_mix = learn_mixing ? m * n : 0;

  const Eigen::Index n_params = n_mix + n + n_flow;
  AdamState adam(n_params, cfg.adam);
  Vector params(n_params);

  long p_perp_violations = 0;
  long steps_run = 0;

  for (long step = 0; step < cfg.max_steps; ++step) {
    const Matrix batch = batches(cfg.batch_size);
    const QmlTerms terms = qml_empirical_loss(vdm, batch, cfg.c_perp, cfg.p_perp);
    const Vector p = softmax_weights(vdm.weights.logits);
    if (p.minCoeff() <= cfg.p_perp) ++p_perp_violations;
    if (!std::isfinite(terms.total)) {
      if (checkpoint_sink) checkpoint_sink(step, vdm, adam);
      throw std::runtime_error("diverged");
    }
    if (log_sink && (step % cfg.log_every == 0)) {
      log_sink({step, terms.total, terms.complement, terms.projection, terms.penalty,
                orthogonality_penalty(vdm.coefficients), p.minCoeff()});
    }
    if (checkpoint_sink && cfg.checkpoint_every > 0 && step > 0 && step % cfg.checkpoint_every == 0)
      checkpoint_sink(step, vdm, adam);

    QmlGradients grads = qml_gradient(vdm, batch, cfg.c_perp, cfg.p_perp);
    // Keep only the tangent part of the coefficient gradient; the radial part
    // is cancelled by the per-step renormalization.
    if (learn_mixing)
      for (int k = 0; k < n; ++k)
        grads.coefficients.col(k) -=
            grads.coefficients.col(k).dot(vdm.coefficients.col(k)) * vdm.coefficients.col(k);
    Vector grad_vec(n_params);
    if (learn_mixing)
      grad_vec.head(n_mix) = Eigen::Map<const Vector>(grads.coefficients.data(), n_mix);
    grad_vec.segment(n_mix, n) = grads.logits;
    if (n_flow > 0) grad_vec.tail(n_flow) = grads.flow;

    if (learn_mixing) params.head(n_mix) = Eigen::Map<const Vector>(vdm.coefficients.data(), n_mix);
    params.segment(n_mix, n) = vdm.weights.logits;
    if (n_flow > 0) params.tail(n_flow) = vdm.flow->coeffs;

    adam_step(adam, params, grad_vec);

    if (learn_mixing) {
      vdm.coefficients = Eigen::Map<const Matrix>(params.data(), m, n);
      vdm.coefficients = normalize_columns(vdm.coefficients);
    }
    vdm.weights.logits = params.segment(n_mix, n);
    if (n_flow > 0) vdm.flow->coeffs = params.tail(n_flow).cwiseMax(0.0);
    steps_run = step + 1;
  }

  // Order states by Boltzmann weight (largest p first).
  const Vector p_final = softmax_weights(vdm.weights.logits);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return p_final[a] > p_final[b]; });

  SpectrumResult result;
  result.method = "qml";
  result.basis = cfg.basis;
  result.flow = vdm.flow;
  result.eigenvectors.resize(m, n);
  result.gaps.resize(n);
  const double t = vdm.weights.temperature;
  for (int k = 0; k < n; ++k) {
    result.eigenvectors.col(k) = vdm.coefficients.col(order[k]);
    result.gaps[k] = -t * (vdm.weights.logits[order[k]] - vdm.weights.logits[order[0]]);
  }
  result.eigenvalues = result.gaps;

  double diag_sq = 0.0;
  for (int k = 0; k < std::min(m, n); ++k) diag_sq += result.eigenvectors(k, k) * result.eigenvectors(k, k);
  result.diagnostics["diag_dominance"] = diag_sq / result.eigenvectors.squaredNorm();
  result.diagnostics["steps"] = static_cast<double>(steps_run);
  result.diagnostics["min_p"] = p_final.minCoeff();
  result.diagnostics["p_perp"] = cfg.p_perp;
  result.diagnostics["p_perp_violations"] = static_cast<double>(p_perp_violations);
  result.diagnostics["p_perp_exceeds_min_p"] = p_final.minCoeff() <= cfg.p_perp ? 1.0 : 0.0;
  result.diagnostics["l_perp"] = orthogonality_penalty(vdm.coefficients);
  return result;
}

}  // namespace thermal
