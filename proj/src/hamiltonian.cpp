#include "thermal/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

#include "thermal/parallel.hpp"

namespace thermal {

Potential Potential::polynomial(Vector c) {
  Eigen::Index top = -1;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) top = i;
  if (top < 2 || top % 2 != 0 || c[top] <= 0.0)
    throw std::invalid_argument("potential is not confining");
  return Potential{Kind::Polynomial, std::move(c)};
}

double potential_eval(const Potential& v, double x) {
  switch (v.kind) {
    case Potential::Kind::Harmonic:
      return 0.5 * x * x;
    case Potential::Kind::AnharmonicPaper:
      return x * x * x * x / 16.0 - x * x / 2.0 - x;
    case Potential::Kind::Polynomial: {
      double acc = 0.0;
      for (Eigen::Index i = v.coeffs.size() - 1; i >= 0; --i) acc = acc * x + v.coeffs[i];
      return acc;
    }
  }
  throw std::logic_error("unreachable");
}

Vector potential_eval(const Potential& v, const Vector& xs) {
  Vector out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) out[i] = potential_eval(v, xs[i]);
  return out;
}

double potential_minimum_location(const Potential& v) {
  double best_x = 0.0;
  double best_v = potential_eval(v, 0.0);
  for (int i = 0; i <= 4000; ++i) {
    const double x = -20.0 + 40.0 * i / 4000.0;
    const double val = potential_eval(v, x);
    if (val < best_v) {
      best_v = val;
      best_x = x;
    }
  }
  // Golden-section refine around the best scan cell.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_x - 0.01, b = best_x + 0.01;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  while (b - a > 1e-10) {
    if (potential_eval(v, c) < potential_eval(v, d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return (a + b) / 2.0;
}

FlowedBasisValues flowed_basis_values(const BasisSet& basis, const FlowMap& flow, const Vector& xs) {
  FlowedBasisValues out;
  const Eigen::Index n = xs.size();
  out.fx.resize(n);
  out.g.resize(n);
  out.gp.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.fx[i] = flow_forward(flow, xs[i]);
    out.g[i] = flow_derivative(flow, xs[i]);
    out.gp[i] = flow_second_derivative(flow, xs[i]);
  }
  const Matrix b = basis_values(basis, out.fx);
  const Matrix db = basis_derivatives(basis, out.fx);
  const Eigen::ArrayXd sqrt_g = out.g.array().sqrt();
  out.values = b.array().rowwise() * sqrt_g.transpose();
  // phi_j' = psi_j'(f) g^{3/2} + psi_j(f) g' / (2 sqrt(g))
  out.derivs = db.array().rowwise() * (out.g.array() * sqrt_g).transpose() +
               b.array().rowwise() * (out.gp.array() / (2.0 * sqrt_g)).transpose();
  return out;
}

namespace {

Matrix quadrature_elements(const Matrix& values, const Matrix& derivs, const Vector& v_on_grid,
                           const QuadratureGrid& grid) {
  const Eigen::Index m = values.rows();
  Matrix h(m, m);
  const Vector wv = grid.weights.cwiseProduct(v_on_grid);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    for (Eigen::Index k = jj; k < m; ++k) {
      const double kin = 0.5 * derivs.row(jj).cwiseProduct(derivs.row(k)).dot(grid.weights.transpose());
      const double pot = values.row(jj).cwiseProduct(values.row(k)).dot(wv.transpose());
      h(jj, k) = kin + pot;
      h(k, jj) = h(jj, k);
    }
  });
  return h;
}

}  // namespace

Matrix matrix_elements(const Potential& v, const BasisSet& basis, const QuadratureGrid& grid,
                       const FlowMap* flow) {
  const int m = basis.size;
  if (basis.family == BasisFamily::Fourier &&
      (grid.lo < -basis.half_width - 1e-12 || grid.hi > basis.half_width + 1e-12))
    throw std::invalid_argument("grid extends beyond the fourier box");

  if (flow == nullptr && basis.family == BasisFamily::Hermite && v.kind == Potential::Kind::Harmonic) {
    Matrix h = Matrix::Zero(m, m);
    for (int j = 0; j < m; ++j) h(j, j) = j + 0.5;
    return h;
  }

  const Vector v_on_grid = potential_eval(v, grid.nodes);

  if (flow != nullptr) {
    const FlowedBasisValues fb = flowed_basis_values(basis, *flow, grid.nodes);
    return quadrature_elements(fb.values, fb.derivs, v_on_grid, grid);
  }

  const Matrix values = basis_values(basis, grid.nodes);

  if (basis.family == BasisFamily::Fourier) {
    const Vector wv = grid.weights.cwiseProduct(v_on_grid);
    Matrix h = values * wv.asDiagonal() * values.transpose();
    for (int j = 1; j < m; ++j) {
      const int k = (j + 1) / 2;
      const double w = k * M_PI / basis.half_width;
      h(j, j) += 0.5 * w * w;
    }
    return h;
  }

  const Matrix derivs = basis_derivatives(basis, grid.nodes);
  return quadrature_elements(values, derivs, v_on_grid, grid);
}

double variational_energy(const Matrix& h, const VariationalDensityMatrix& vdm) {
  if (h.rows() != h.cols() || h.rows() != vdm.coefficients.rows())
    throw std::invalid_argument("hamiltonian/coefficient dimension mismatch");
  if (vdm.weights.logits.size() != vdm.coefficients.cols())
    throw std::invalid_argument("logit/coefficient dimension mismatch");
  const Vector p = softmax_weights(vdm.weights.logits);
  double energy = 0.0;
  for (Eigen::Index n = 0; n < vdm.coefficients.cols(); ++n)
    energy += p[n] * vdm.coefficients.col(n).dot(h * vdm.coefficients.col(n));
  return energy;
}

}  // namespace thermal
