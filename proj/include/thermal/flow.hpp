#pragma once

#include <stdexcept>

#include "thermal/types.hpp"

namespace thermal {

enum class FlowVariant { PaperSum, AffinePlusSum };

// A monotone 1-D bijection built from tanh bumps on a uniform sublattice
// x_i = lo + (hi - lo) i / n, i = 0..n:
//   PaperSum:      f(x) =     sum_i C_i tanh(x - x_i)
//   AffinePlusSum: f(x) = x + sum_i C_i tanh(x - x_i)
// Non-negative C_i keep f non-decreasing; AffinePlusSum is a true bijection
// of the real line.
struct FlowMap {
  FlowVariant variant = FlowVariant::PaperSum;
  double lo = -10.0;
  double hi = 10.0;
  Vector coeffs;  // size n + 1, all >= 0

  FlowMap() = default;
  FlowMap(FlowVariant v, double a, double b, Vector c);

  // Identity-like start: zero coefficients for AffinePlusSum, uniform
  // C_i = (hi - lo) / (2n) for PaperSum (the tanh sum then approximates x on
  // the bulk of [lo, hi]).
  static FlowMap identity_init(FlowVariant v, double a, double b, int n);

  int node_count() const { return static_cast<int>(coeffs.size()); }
  double node(int i) const { return lo + (hi - lo) * i / (node_count() - 1); }
};

double flow_forward(const FlowMap& f, double x);

// f'(x) = sum_i C_i sech^2(x - x_i) (+1 for AffinePlusSum). A PaperSum flow
// with all C_i = 0 has identically zero derivative and is rejected.
double flow_derivative(const FlowMap& f, double x);

// f''(x) = -2 sum_i C_i sech^2(x - x_i) tanh(x - x_i).
double flow_second_derivative(const FlowMap& f, double x);

// psi(f(x)) sqrt(f'(x)); the square-root Jacobian factor preserves L^2 inner
// products.
template <class Wavefunction>
double apply_flow(const FlowMap& f, Wavefunction&& psi, double x) {
  const double deriv = flow_derivative(f, x);
  return psi(flow_forward(f, x)) * std::sqrt(deriv);
}

// d f(x) / d C_i = tanh(x - x_i).
Vector flow_param_gradient(const FlowMap& f, double x);

// d f'(x) / d C_i = sech^2(x - x_i).
Vector flow_derivative_param_gradient(const FlowMap& f, double x);

// d f''(x) / d C_i = -2 sech^2(x - x_i) tanh(x - x_i).
Vector flow_second_derivative_param_gradient(const FlowMap& f, double x);

}  // namespace thermal
