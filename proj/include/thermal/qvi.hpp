#pragma once

#include <cstdint>
#include <functional>

#include "thermal/hamiltonian.hpp"
#include "thermal/optim.hpp"
#include "thermal/spectrum.hpp"
#include "thermal/vdm.hpp"

namespace thermal {

struct QviConfig {
  double temperature = 1.0;
  int n_states = 10;
  double c_perp = 1e3;
  long max_steps = 50000;
  AdamConfig adam;
  // Early stop when the loss changes by less than plateau_tol over
  // plateau_window steps; 0 runs to max_steps.
  double plateau_tol = 0.0;
  int plateau_window = 500;
  long log_every = 100;
  long checkpoint_every = 0;
  double init_noise = 1e-3;

  BasisSet basis = BasisSet::fourier(40, 10.0);
  int grid_resolution = 2048;

  bool use_flow = false;
  FlowVariant flow_variant = FlowVariant::PaperSum;
  double flow_lo = -10.0;
  double flow_hi = 10.0;
  int flow_nodes = 400;
};

struct QviTerms {
  double energy = 0.0;        // Tr[rho H]
  double entropy_term = 0.0;  // T sum p log p  (negative entropy times T)
  double penalty = 0.0;       // c_perp L_perp
  double total = 0.0;
};

struct QviGradients {
  Matrix coefficients;
  Vector logits;
  Vector flow;  // empty without a flow
};

// Fixed ingredients of one QVI optimization: the potential, basis, grid, and
// the (flow-free) Hamiltonian matrix, which is computed once. With a flow the
// energy integrals are re-evaluated on the flow-transformed states.
class QviProblem {
 public:
  QviProblem(Potential v, BasisSet basis, QuadratureGrid grid);

  const Matrix& hamiltonian() const { return h_; }
  const BasisSet& basis() const { return basis_; }
  const QuadratureGrid& grid() const { return grid_; }

  QviTerms loss(const VariationalDensityMatrix& vdm, double c_perp) const;
  QviGradients gradient(const VariationalDensityMatrix& vdm, double c_perp) const;

  // Per-state Rayleigh energies c_n^T H~ c_n (on flowed states when a flow is
  // present).
  Vector state_energies(const VariationalDensityMatrix& vdm) const;

 private:
  struct FlowEval;
  FlowEval evaluate_flowed(const VariationalDensityMatrix& vdm) const;

  Potential v_;
  BasisSet basis_;
  QuadratureGrid grid_;
  Matrix h_;
  Vector v_on_grid_;
  // tanh / sech^2 node kernels on the grid, built on first use of a flow.
  mutable Matrix t_mat_, s_mat_, st_mat_;
  mutable bool flow_kernels_ready_ = false;
};

// L_QVI = sum_n p_n c_n^T H c_n + T sum_n p_n log p_n + c_perp L_perp for the
// flow-free family; dimensions must agree.
QviTerms qvi_loss(const Matrix& h, const VariationalDensityMatrix& vdm, double c_perp);
QviGradients qvi_gradient(const Matrix& h, const VariationalDensityMatrix& vdm, double c_perp);

struct TrainLogRow {
  long step = 0;
  double total = 0.0;
  double energy = 0.0;
  double entropy_term = 0.0;
  double penalty = 0.0;
  double l_perp = 0.0;
  double min_p = 0.0;
};

using LogSink = std::function<void(const TrainLogRow&)>;
using CheckpointSink =
    std::function<void(long step, const VariationalDensityMatrix&, const AdamState&)>;

// Full training loop: gradient -> Adam -> clamp C_i >= 0 -> renormalize
// columns. States are returned sorted by Rayleigh energy; eigenvalues are the
// Rayleigh energies, with the logit-implied gaps kept in the diagnostics.
SpectrumResult train_qvi(const QviConfig& cfg, const Potential& v, std::uint64_t seed,
                         const LogSink& log_sink = {}, const CheckpointSink& checkpoint_sink = {});

}  // namespace thermal
