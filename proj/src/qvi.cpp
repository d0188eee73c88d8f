#include "thermal/qvi.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace thermal {

namespace {

void check_dims(const Matrix& h, const VariationalDensityMatrix& vdm) {
  if (h.rows() != h.cols() || h.rows() != vdm.coefficients.rows())
    throw std::invalid_argument("hamiltonian/coefficient dimension mismatch");
  if (vdm.weights.logits.size() != vdm.coefficients.cols())
    throw std::invalid_argument("logit/coefficient dimension mismatch");
}

double entropy_loss_term(const Vector& p, double temperature) {
  double s = 0.0;
  for (Eigen::Index n = 0; n < p.size(); ++n)
    if (p[n] > 0.0) s += p[n] * std::log(p[n]);
  return temperature * s;
}

Vector logit_gradient(const Vector& p, const Vector& per_state, double temperature) {
  // d/dl_k [ sum_n p_n g_n ] with g_n = E_n + T log p_n; the softmax Jacobian
  // gives p_k (g_k - sum_n p_n g_n).
  Vector g(p.size());
  for (Eigen::Index n = 0; n < p.size(); ++n) g[n] = per_state[n] + temperature * std::log(p[n]);
  const double mean = p.dot(g);
  return p.array() * (g.array() - mean);
}

}  // namespace

QviProblem::QviProblem(Potential v, BasisSet basis, QuadratureGrid grid)
    : v_(std::move(v)), basis_(std::move(basis)), grid_(std::move(grid)) {
  h_ = matrix_elements(v_, basis_, grid_);
  v_on_grid_ = potential_eval(v_, grid_.nodes);
}

struct QviProblem::FlowEval {
  Vector p;            // softmax weights
  Vector energies;     // per-state energies on flowed states
  Matrix coeff_grad;   // dE_n/da_{j,n} (per column, unweighted by p)
  Matrix flow_grad;    // (n_flow x N) dE_n/dC_i
};

QviProblem::FlowEval QviProblem::evaluate_flowed(const VariationalDensityMatrix& vdm) const {
  const FlowMap& flow = *vdm.flow;
  const Eigen::Index n_pts = grid_.nodes.size();
  const int n_states = vdm.n_states();
  const int n_flow = flow.node_count();

  if (!flow_kernels_ready_) {
    t_mat_.resize(n_flow, n_pts);
    s_mat_.resize(n_flow, n_pts);
    for (int i = 0; i < n_flow; ++i) {
      for (Eigen::Index k = 0; k < n_pts; ++k) {
        const double t = std::tanh(grid_.nodes[k] - flow.node(i));
        t_mat_(i, k) = t;
        s_mat_(i, k) = 1.0 - t * t;
      }
    }
    st_mat_ = -2.0 * s_mat_.cwiseProduct(t_mat_);
    flow_kernels_ready_ = true;
  }

  Vector fx(n_pts), g(n_pts), gp(n_pts);
  for (Eigen::Index k = 0; k < n_pts; ++k) {
    fx[k] = flow_forward(flow, grid_.nodes[k]);
    g[k] = flow_derivative(flow, grid_.nodes[k]);
    gp[k] = flow_second_derivative(flow, grid_.nodes[k]);
  }
  const Eigen::ArrayXd sqrt_g = g.array().sqrt();
  const Eigen::ArrayXd g32 = g.array() * sqrt_g;

  const Matrix b = basis_values(basis_, fx);
  const Matrix db = basis_derivatives(basis_, fx);
  const Matrix d2b = basis_second_derivatives(basis_, fx);

  // Flowed basis functions and their x-derivatives.
  const Matrix phi = b.array().rowwise() * sqrt_g.transpose();
  const Matrix dphi = db.array().rowwise() * g32.transpose() +
                      b.array().rowwise() * (gp.array() / (2.0 * sqrt_g)).transpose();

  FlowEval out;
  out.p = softmax_weights(vdm.weights.logits);
  out.energies.resize(n_states);
  out.coeff_grad.resize(vdm.coefficients.rows(), n_states);
  out.flow_grad.resize(n_flow, n_states);

  const Eigen::ArrayXd w = grid_.weights.array();
  const Eigen::ArrayXd wv = w * v_on_grid_.array();

  for (int n = 0; n < n_states; ++n) {
    const Vector a_n = vdm.coefficients.col(n);
    const Eigen::ArrayXd m = (a_n.transpose() * b).transpose().array();
    const Eigen::ArrayXd md = (a_n.transpose() * db).transpose().array();
    const Eigen::ArrayXd mdd = (a_n.transpose() * d2b).transpose().array();

    const Eigen::ArrayXd psi = m * sqrt_g;
    const Eigen::ArrayXd dpsi = md * g32 + m * gp.array() / (2.0 * sqrt_g);

    out.energies[n] = 0.5 * (w * dpsi.square()).sum() + (wv * psi.square()).sum();

    out.coeff_grad.col(n) =
        dphi * (w * dpsi).matrix() + phi * (2.0 * wv * psi).matrix();

    const Eigen::ArrayXd vv = v_on_grid_.array();
    const Eigen::ArrayXd pn =
        w * (dpsi * (mdd * g32 + md * gp.array() / (2.0 * sqrt_g)) + 2.0 * vv * psi * md * sqrt_g);
    const Eigen::ArrayXd qn =
        w * (dpsi * (1.5 * sqrt_g * md - m * gp.array() / (4.0 * g32)) + vv * psi * m / sqrt_g);
    const Eigen::ArrayXd rn = w * dpsi * m / (2.0 * sqrt_g);
    out.flow_grad.col(n) = t_mat_ * pn.matrix() + s_mat_ * qn.matrix() + st_mat_ * rn.matrix();
  }
  return out;
}

Vector QviProblem::state_energies(const VariationalDensityMatrix& vdm) const {
  if (vdm.flow) return evaluate_flowed(vdm).energies;
  check_dims(h_, vdm);
  Vector e(vdm.n_states());
  for (Eigen::Index n = 0; n < e.size(); ++n)
    e[n] = vdm.coefficients.col(n).dot(h_ * vdm.coefficients.col(n));
  return e;
}

QviTerms QviProblem::loss(const VariationalDensityMatrix& vdm, double c_perp) const {
  if (!vdm.flow) return qvi_loss(h_, vdm, c_perp);
  const FlowEval eval = evaluate_flowed(vdm);
  QviTerms terms;
  terms.energy = eval.p.dot(eval.energies);
  terms.entropy_term = entropy_loss_term(eval.p, vdm.weights.temperature);
  terms.penalty = c_perp * orthogonality_penalty(vdm.coefficients);
  terms.total = terms.energy + terms.entropy_term + terms.penalty;
  return terms;
}

QviGradients QviProblem::gradient(const VariationalDensityMatrix& vdm, double c_perp) const {
  if (!vdm.flow) return qvi_gradient(h_, vdm, c_perp);
  const FlowEval eval = evaluate_flowed(vdm);
  QviGradients grads;
  grads.coefficients = eval.coeff_grad * eval.p.asDiagonal() +
                       c_perp * orthogonality_penalty_gradient(vdm.coefficients);
  grads.logits = logit_gradient(eval.p, eval.energies, vdm.weights.temperature);
  grads.flow = eval.flow_grad * eval.p;
  return grads;
}

QviTerms qvi_loss(const Matrix& h, const VariationalDensityMatrix& vdm, double c_perp) {
  check_dims(h, vdm);
  const Vector p = softmax_weights(vdm.weights.logits);
  QviTerms terms;
  for (Eigen::Index n = 0; n < p.size(); ++n)
    terms.energy += p[n] * vdm.coefficients.col(n).dot(h * vdm.coefficients.col(n));
  terms.entropy_term = entropy_loss_term(p, vdm.weights.temperature);
  terms.penalty = c_perp * orthogonality_penalty(vdm.coefficients);
  terms.total = terms.energy + terms.entropy_term + terms.penalty;
  return terms;
}

QviGradients qvi_gradient(const Matrix& h, const VariationalDensityMatrix& vdm, double c_perp) {
  check_dims(h, vdm);
  const Vector p = softmax_weights(vdm.weights.logits);
  const Matrix hc = h * vdm.coefficients;

  QviGradients grads;
  grads.coefficients = 2.0 * hc * p.asDiagonal() +
                       c_perp * orthogonality_penalty_gradient(vdm.coefficients);
  Vector energies(p.size());
  for (Eigen::Index n = 0; n < p.size(); ++n) energies[n] = vdm.coefficients.col(n).dot(hc.col(n));
  grads.logits = logit_gradient(p, energies, vdm.weights.temperature);
  return grads;
}

SpectrumResult train_qvi(const QviConfig& cfg, const Potential& v, std::uint64_t seed,
                         const LogSink& log_sink, const CheckpointSink& checkpoint_sink) {
  if (cfg.n_states < 1 || cfg.n_states > cfg.basis.size)
    throw std::invalid_argument("need 1 <= n_states <= basis size");
  if (!(cfg.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");

  const QviProblem problem(v, cfg.basis, make_grid(cfg.basis, cfg.grid_resolution));
  const int m = cfg.basis.size;
  const int n = cfg.n_states;

  VariationalDensityMatrix vdm;
  vdm.basis = cfg.basis;
  vdm.weights.temperature = cfg.temperature;
  vdm.weights.logits.setZero(n);
  for (int k = 0; k < n; ++k) vdm.weights.logits[k] = -double(k);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  vdm.coefficients.setZero(m, n);
  for (int k = 0; k < n; ++k) vdm.coefficients(k, k) = 1.0;
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < n; ++k) vdm.coefficients(j, k) += cfg.init_noise * noise(rng);
  vdm.coefficients = normalize_columns(vdm.coefficients);

  if (cfg.use_flow)
    vdm.flow = FlowMap::identity_init(cfg.flow_variant, cfg.flow_lo, cfg.flow_hi, cfg.flow_nodes);
  const int n_flow = cfg.use_flow ? vdm.flow->node_count() : 0;

  const Eigen::Index n_params = static_cast<Eigen::Index>(m) * n + n + n_flow;
  AdamState adam(n_params, cfg.adam);
  Vector params(n_params);

  auto pack = [&](Vector& out) {
    out.head(m * n) = Eigen::Map<const Vector>(vdm.coefficients.data(), m * n);
    out.segment(m * n, n) = vdm.weights.logits;
    if (n_flow > 0) out.tail(n_flow) = vdm.flow->coeffs;
  };
  auto unpack = [&](const Vector& in) {
    vdm.coefficients = Eigen::Map<const Matrix>(in.data(), m, n);
    vdm.weights.logits = in.segment(m * n, n);
    if (n_flow > 0) vdm.flow->coeffs = in.tail(n_flow).cwiseMax(0.0);
    vdm.coefficients = normalize_columns(vdm.coefficients);
  };

  double window_loss = std::numeric_limits<double>::infinity();
  long steps_run = 0;
  bool plateaued = false;

  for (long step = 0; step < cfg.max_steps; ++step) {
    const QviTerms terms = problem.loss(vdm, cfg.c_perp);
    if (!std::isfinite(terms.total)) {
      if (checkpoint_sink) checkpoint_sink(step, vdm, adam);
      throw std::runtime_error("diverged");
    }
    if (log_sink && (step % cfg.log_every == 0)) {
      const Vector p = softmax_weights(vdm.weights.logits);
      log_sink({step, terms.total, terms.energy, terms.entropy_term, terms.penalty,
                orthogonality_penalty(vdm.coefficients), p.minCoeff()});
    }
    if (checkpoint_sink && cfg.checkpoint_every > 0 && step > 0 && step % cfg.checkpoint_every == 0)
      checkpoint_sink(step, vdm, adam);
    if (cfg.plateau_tol > 0.0 && step % cfg.plateau_window == 0) {
      if (std::abs(window_loss - terms.total) < cfg.plateau_tol) {
        plateaued = true;
        steps_run = step;
        break;
      }
      window_loss = terms.total;
    }

    QviGradients grads = problem.gradient(vdm, cfg.c_perp);
    // Unit columns are maintained by projection, so only the tangent part of
    // the coefficient gradient is a real descent direction; the radial part
    // would just feed Adam's moments with motion the renormalization cancels.
    for (int k = 0; k < n; ++k)
      grads.coefficients.col(k) -=
          grads.coefficients.col(k).dot(vdm.coefficients.col(k)) * vdm.coefficients.col(k);
    Vector grad_vec(n_params);
    grad_vec.head(m * n) = Eigen::Map<const Vector>(grads.coefficients.data(), m * n);
    grad_vec.segment(m * n, n) = grads.logits;
    if (n_flow > 0) grad_vec.tail(n_flow) = grads.flow;

    pack(params);
    adam_step(adam, params, grad_vec);
    unpack(params);
    steps_run = step + 1;
  }

  // Order states by Rayleigh energy.
  const Vector energies = problem.state_energies(vdm);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return energies[a] < energies[b]; });

  SpectrumResult result;
  result.method = "qvi";
  result.basis = cfg.basis;
  result.flow = vdm.flow;
  result.eigenvalues.resize(n);
  result.eigenvectors.resize(m, n);
  Vector logits_sorted(n);
  for (int k = 0; k < n; ++k) {
    result.eigenvalues[k] = energies[order[k]];
    result.eigenvectors.col(k) = vdm.coefficients.col(order[k]);
    logits_sorted[k] = vdm.weights.logits[order[k]];
  }
  result.gaps = result.eigenvalues.array() - result.eigenvalues[0];

  const QviTerms final_terms = problem.loss(vdm, cfg.c_perp);
  result.diagnostics["loss"] = final_terms.total;
  result.diagnostics["energy"] = final_terms.energy;
  result.diagnostics["entropy_term"] = final_terms.entropy_term;
  result.diagnostics["penalty"] = final_terms.penalty;
  result.diagnostics["l_perp"] = orthogonality_penalty(vdm.coefficients);
  result.diagnostics["steps"] = static_cast<double>(steps_run);
  result.diagnostics["plateaued"] = plateaued ? 1.0 : 0.0;
  // Logit-implied gaps for the temperature-consistency check.
  BoltzmannWeights sorted_weights{logits_sorted, cfg.temperature, vdm.weights.p_perp};
  const Vector logit_gaps = eigenvalue_report(sorted_weights);
  for (int k = 0; k < n; ++k)
    result.diagnostics["logit_gap_" + std::to_string(k)] = logit_gaps[k];
  return result;
}

}  // namespace thermal
