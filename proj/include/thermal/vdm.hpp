#pragma once

#include <optional>

#include <json.hpp>

#include "thermal/basis.hpp"
#include "thermal/flow.hpp"
#include "thermal/types.hpp"

namespace thermal {

// Softmax-parametrized Boltzmann factors p_n over the modeled states, plus
// the fixed complement eigenvalue p_perp used by the QML regularizer.
struct BoltzmannWeights {
  Vector logits;
  double temperature = 1.0;
  double p_perp = 1e-6;
};

// rho = sum_n p_n |n~><n~| with |n~> = sum_j a_{j,n} |j>. Columns of the
// coefficient matrix are kept unit-norm by the optimizer; orthogonality is
// soft-enforced through the L_perp penalty.
struct VariationalDensityMatrix {
  BasisSet basis;
  Matrix coefficients;  // M x N
  BoltzmannWeights weights;
  std::optional<FlowMap> flow;

  int n_states() const { return static_cast<int>(coefficients.cols()); }
};

// Rescales every column to unit Euclidean norm; a zero column is a collapsed
// state and is rejected.
Matrix normalize_columns(Matrix coeffs);

// L_perp = sum_{n<m} (c_n . c_m)^2; zero iff columns are pairwise orthogonal.
double orthogonality_penalty(const Matrix& coeffs);

// d L_perp / d a, same shape as the coefficient matrix.
Matrix orthogonality_penalty_gradient(const Matrix& coeffs);

// Shift-invariant softmax; sums to one.
Vector softmax_weights(const Vector& logits);

// -sum p log p with 0 log 0 = 0.
double entropy_diag(const Vector& p);

// sum_n p_n log(p_n / q_n). p_n > 0 where q_n = 0 is a support mismatch.
double qre_diag(const Vector& p, const Vector& q);

// Energy gaps relative to the lowest state, lambda_n - lambda_0 =
// -T (log p_n - log p_max), sorted ascending (first entry 0).
Vector eigenvalue_report(const BoltzmannWeights& weights);

// JSON checkpoint form: basis spec, row-major coefficients, logits,
// temperature, optional flow parameters.
nlohmann::json to_json(const VariationalDensityMatrix& vdm);
VariationalDensityMatrix vdm_from_json(const nlohmann::json& j);

nlohmann::json basis_to_json(const BasisSet& basis);
BasisSet basis_from_json(const nlohmann::json& j);
nlohmann::json flow_to_json(const FlowMap& flow);
FlowMap flow_from_json(const nlohmann::json& j);

}  // namespace thermal
