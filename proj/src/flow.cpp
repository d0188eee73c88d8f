#include "thermal/flow.hpp"

#include <cmath>

namespace thermal {

namespace {

double sech2(double t) {
  const double c = std::cosh(t);
  return 1.0 / (c * c);
}

}  // namespace

FlowMap::FlowMap(FlowVariant v, double a, double b, Vector c)
    : variant(v), lo(a), hi(b), coeffs(std::move(c)) {
  if (!(hi > lo)) throw std::invalid_argument("flow interval must have hi > lo");
  if (coeffs.size() < 2) throw std::invalid_argument("flow needs at least two nodes");
  if ((coeffs.array() < 0.0).any()) throw std::invalid_argument("flow coefficients must be non-negative");
}

FlowMap FlowMap::identity_init(FlowVariant v, double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("flow needs at least two nodes");
  Vector c(n + 1);
  if (v == FlowVariant::AffinePlusSum) {
    c.setZero();
  } else {
    c.setConstant((b - a) / (2.0 * n));
  }
  return FlowMap(v, a, b, std::move(c));
}

double flow_forward(const FlowMap& f, double x) {
  double sum = f.variant == FlowVariant::AffinePlusSum ? x : 0.0;
  const int n = f.node_count();
  for (int i = 0; i < n; ++i) sum += f.coeffs[i] * std::tanh(x - f.node(i));
  return sum;
}

double flow_derivative(const FlowMap& f, double x) {
  if (f.variant == FlowVariant::PaperSum && f.coeffs.maxCoeff() <= 0.0)
    throw std::runtime_error("degenerate flow");
  double sum = f.variant == FlowVariant::AffinePlusSum ? 1.0 : 0.0;
  const int n = f.node_count();
  for (int i = 0; i < n; ++i) sum += f.coeffs[i] * sech2(x - f.node(i));
  return sum;
}

double flow_second_derivative(const FlowMap& f, double x) {
  double sum = 0.0;
  const int n = f.node_count();
  for (int i = 0; i < n; ++i) {
    const double t = x - f.node(i);
    sum += -2.0 * f.coeffs[i] * sech2(t) * std::tanh(t);
  }
  return sum;
}

Vector flow_param_gradient(const FlowMap& f, double x) {
  const int n = f.node_count();
  Vector g(n);
  for (int i = 0; i < n; ++i) g[i] = std::tanh(x - f.node(i));
  return g;
}

Vector flow_derivative_param_gradient(const FlowMap& f, double x) {
  const int n = f.node_count();
  Vector g(n);
  for (int i = 0; i < n; ++i) g[i] = sech2(x - f.node(i));
  return g;
}

Vector flow_second_derivative_param_gradient(const FlowMap& f, double x) {
  const int n = f.node_count();
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    const double t = x - f.node(i);
    g[i] = -2.0 * sech2(t) * std::tanh(t);
  }
  return g;
}

}  // namespace thermal
