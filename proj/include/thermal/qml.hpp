#pragma once

#include <cstdint>
#include <functional>

#include "thermal/optim.hpp"
#include "thermal/sampler.hpp"
#include "thermal/spectrum.hpp"
#include "thermal/vdm.hpp"

namespace thermal {

// The three variational families of the anharmonic experiment: plain Hermite
// superpositions, superpositions of flow-transformed Hermite functions (one
// flow shared across all states), and flowed Hermite functions with no mixing.
enum class QmlFamily { HermiteMixture, HermiteMixturePlusFlow, FlowOnly };

struct QmlConfig {
  double beta = 10.0;  // inverse temperature of the sampled thermal state
  int n_states = 10;
  double c_perp = 1e2;
  double p_perp = 1e-6;
  int batch_size = 500;
  long max_steps = 20000;
  QmlFamily family = QmlFamily::HermiteMixture;
  AdamConfig adam;
  long log_every = 100;
  long checkpoint_every = 0;
  double init_noise = 1e-3;

  BasisSet basis = BasisSet::hermite(10);

  FlowVariant flow_variant = FlowVariant::PaperSum;
  double flow_lo = -10.0;
  double flow_hi = 10.0;
  int flow_nodes = 400;
};

// psi~_n(x) = sum_j a_{j,n} phi_j(x), with phi_j the (optionally flowed)
// basis functions; Fourier modes vanish outside their box.
double state_amplitude(const VariationalDensityMatrix& vdm, int n, double x);

struct QmlTerms {
  double complement = 0.0;  // -log p_perp
  double projection = 0.0;  // -(1/N) sum_{i,n} log(p_n/p_perp) psi_n(y_i) psi_n(x_i)
  double penalty = 0.0;     // c_perp L_perp
  double total = 0.0;
};

struct QmlGradients {
  Matrix coefficients;
  Vector logits;
  Vector flow;  // empty without a flow
};

// Empirical loss over sampled endpoint pairs; rows of `endpoints` are
// (x_i, y_i). Minimizing it maximizes Tr[rho_T log rho~] up to the
// rho_T-entropy constant.
QmlTerms qml_empirical_loss(const VariationalDensityMatrix& vdm, const Matrix& endpoints,
                            double c_perp, double p_perp);
QmlGradients qml_gradient(const VariationalDensityMatrix& vdm, const Matrix& endpoints,
                          double c_perp, double p_perp);

// Supplies batch_size endpoint pairs per call.
using BatchSource = std::function<Matrix(int batch_size)>;

// Cycles a pre-generated endpoint bank in shuffled order (reshuffled each
// epoch).
BatchSource bank_batch_source(Matrix bank, std::uint64_t seed);

// Draws fresh endpoints from a continuing open-path chain each call.
BatchSource online_batch_source(const ActionConfig& cfg, long burn_in, long thin,
                                std::uint64_t seed, double a_stretch = 2.0);

struct QmlLogRow {
  long step = 0;
  double total = 0.0;
  double complement = 0.0;
  double projection = 0.0;
  double penalty = 0.0;
  double l_perp = 0.0;
  double min_p = 0.0;
};

using QmlLogSink = std::function<void(const QmlLogRow&)>;
using QmlCheckpointSink =
    std::function<void(long step, const VariationalDensityMatrix&, const AdamState&)>;

// Stochastic training loop (gradient -> Adam -> clamp C_i >= 0 -> renormalize
// columns; FlowOnly keeps the identity mixing fixed). States are sorted by
// Boltzmann weight; eigenvalues are gaps from the lowest state.
SpectrumResult train_qml(const QmlConfig& cfg, const BatchSource& batches, std::uint64_t seed,
                         const QmlLogSink& log_sink = {},
                         const QmlCheckpointSink& checkpoint_sink = {});

}  // namespace thermal
