#include "thermal/basis.hpp"

#include <algorithm>
#include <cmath>

namespace thermal {

namespace {

// Abscissas/weights of the 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGl8Nodes[8] = {
    -0.9602898564975362316835609, -0.7966664774136267395915539, -0.5255324099163289858177390,
    -0.1834346424956498049394761, 0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
constexpr double kGl8Weights[8] = {
    0.1012285362903762591525314, 0.2223810344533744705443560, 0.3137066458778872873379622,
    0.3626837833783619829651504, 0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

// Number of full oscillations of the highest basis function across the
// domain; the grid refuses to build with fewer than 4 points per oscillation.
double oscillation_count(const BasisSet& basis) {
  if (basis.size <= 1) return 0.0;
  if (basis.family == BasisFamily::Fourier) return std::ceil((basis.size - 1) / 2.0);
  return (basis.size - 1) / 2.0;
}

void check_fourier_domain(const BasisSet& basis, double x) {
  if (std::abs(x) > basis.half_width)
    throw std::domain_error("fourier mode evaluated outside [-L, L]");
}

}  // namespace

BasisSet::BasisSet(BasisFamily fam, int m, double l) : family(fam), size(m), half_width(l) {
  if (m < 1) throw std::invalid_argument("basis size must be >= 1");
  if (fam == BasisFamily::Hermite && m > kMaxHermiteOrder)
    throw std::invalid_argument("basis order overflow");
  if (fam == BasisFamily::Fourier && !(l > 0.0))
    throw std::invalid_argument("fourier basis needs half_width > 0");
}

double hermite_function_derivative(int n, double x, int max_order) {
  if (n < 0 || n + 1 >= max_order + 1) throw std::invalid_argument("basis order overflow");
  double d = -std::sqrt((n + 1) / 2.0) * hermite_function(n + 1, x, max_order + 1);
  if (n > 0) d += std::sqrt(n / 2.0) * hermite_function(n - 1, x, max_order);
  return d;
}

double fourier_mode(int j, double x, double L) {
  if (j < 0) throw std::invalid_argument("fourier mode index must be >= 0");
  if (!(L > 0.0)) throw std::invalid_argument("fourier basis needs half_width > 0");
  if (std::abs(x) > L) throw std::domain_error("fourier mode evaluated outside [-L, L]");
  if (j == 0) return 1.0 / std::sqrt(2.0 * L);
  const int k = (j + 1) / 2;
  const double arg = k * M_PI * x / L;
  return (j % 2 == 1 ? std::sin(arg) : std::cos(arg)) / std::sqrt(L);
}

double fourier_mode_derivative(int j, double x, double L) {
  if (j == 0) return 0.0;
  const int k = (j + 1) / 2;
  const double w = k * M_PI / L;
  const double arg = w * x;
  return (j % 2 == 1 ? w * std::cos(arg) : -w * std::sin(arg)) / std::sqrt(L);
}

double basis_value(const BasisSet& basis, int j, double x) {
  if (j < 0 || j >= basis.size) throw std::invalid_argument("basis index out of range");
  if (basis.family == BasisFamily::Hermite) return hermite_function(j, x);
  check_fourier_domain(basis, x);
  return fourier_mode(j, x, basis.half_width);
}

double basis_value_or_zero(const BasisSet& basis, int j, double x) {
  if (basis.family == BasisFamily::Fourier && std::abs(x) > basis.half_width) return 0.0;
  return basis_value(basis, j, x);
}

double basis_derivative(const BasisSet& basis, int j, double x) {
  if (j < 0 || j >= basis.size) throw std::invalid_argument("basis index out of range");
  if (basis.family == BasisFamily::Hermite) return hermite_function_derivative(j, x);
  check_fourier_domain(basis, x);
  return fourier_mode_derivative(j, x, basis.half_width);
}

double basis_second_derivative(const BasisSet& basis, int j, double x) {
  if (j < 0 || j >= basis.size) throw std::invalid_argument("basis index out of range");
  if (basis.family == BasisFamily::Hermite) {
    // H_n solves u'' = (x^2 - 2n - 1) u.
    return (x * x - 2.0 * j - 1.0) * hermite_function(j, x);
  }
  check_fourier_domain(basis, x);
  if (j == 0) return 0.0;
  const int k = (j + 1) / 2;
  const double w = k * M_PI / basis.half_width;
  return -w * w * fourier_mode(j, x, basis.half_width);
}

Matrix basis_values(const BasisSet& basis, const Vector& xs) {
  const int m = basis.size;
  const Eigen::Index n = xs.size();
  Matrix out(m, n);
  if (basis.family == BasisFamily::Hermite) {
    const Eigen::ArrayXd x = xs.array();
    Eigen::ArrayXd prev = 0.7511255444649425 * (-x.square() / 2.0).exp();
    out.row(0) = prev;
    if (m == 1) return out;
    Eigen::ArrayXd cur = std::sqrt(2.0) * x * prev;
    out.row(1) = cur;
    for (int k = 1; k + 1 < m; ++k) {
      Eigen::ArrayXd next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(k / (k + 1.0)) * prev;
      prev.swap(cur);
      cur.swap(next);
      out.row(k + 1) = cur;
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(j, i) = basis_value_or_zero(basis, j, xs[i]);
  return out;
}

Matrix basis_derivatives(const BasisSet& basis, const Vector& xs) {
  const int m = basis.size;
  const Eigen::Index n = xs.size();
  Matrix out(m, n);
  if (basis.family == BasisFamily::Hermite) {
    BasisSet wide = basis;
    wide.size = m + 1;
    const Matrix vals = basis_values(wide, xs);
    for (int j = 0; j < m; ++j) {
      out.row(j) = -std::sqrt((j + 1) / 2.0) * vals.row(j + 1);
      if (j > 0) out.row(j) += std::sqrt(j / 2.0) * vals.row(j - 1);
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out(j, i) = std::abs(xs[i]) > basis.half_width ? 0.0 : fourier_mode_derivative(j, xs[i], basis.half_width);
  return out;
}

Matrix basis_second_derivatives(const BasisSet& basis, const Vector& xs) {
  const int m = basis.size;
  const Matrix vals = basis_values(basis, xs);
  Matrix out(m, xs.size());
  if (basis.family == BasisFamily::Hermite) {
    const Eigen::ArrayXd x2 = xs.array().square();
    for (int j = 0; j < m; ++j) out.row(j) = (x2 - (2.0 * j + 1.0)).transpose() * vals.row(j).array();
    return out;
  }
  for (int j = 0; j < m; ++j) {
    const int k = (j + 1) / 2;
    const double w = k * M_PI / basis.half_width;
    out.row(j) = -w * w * vals.row(j);
  }
  return out;
}

QuadratureGrid make_grid(const BasisSet& basis, int resolution, double half_width) {
  if (resolution < 2) throw std::invalid_argument("under-resolved grid");
  const double n_osc = oscillation_count(basis);
  if (n_osc > 0.0 && resolution / n_osc < 4.0) throw std::runtime_error("under-resolved grid");

  QuadratureGrid grid;
  if (basis.family == BasisFamily::Fourier) {
    const double L = basis.half_width;
    const int panels = (resolution + 7) / 8;
    grid.lo = -L;
    grid.hi = L;
    grid.nodes.resize(8 * panels);
    grid.weights.resize(8 * panels);
    const double width = 2.0 * L / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = -L + (p + 0.5) * width;
      for (int q = 0; q < 8; ++q) {
        grid.nodes[8 * p + q] = mid + 0.5 * width * kGl8Nodes[q];
        grid.weights[8 * p + q] = 0.5 * width * kGl8Weights[q];
      }
    }
    return grid;
  }

  double r = half_width;
  if (!(r > 0.0)) r = std::max(12.0, 1.4 * std::sqrt(2.0 * basis.size + 1.0) + 2.0);
  grid.lo = -r;
  grid.hi = r;
  grid.nodes.setLinSpaced(resolution, -r, r);
  const double h = 2.0 * r / (resolution - 1);
  grid.weights.setConstant(resolution, h);
  grid.weights[0] = h / 2.0;
  grid.weights[resolution - 1] = h / 2.0;
  return grid;
}

Matrix gram_matrix(const BasisSet& basis, const QuadratureGrid& grid) {
  if (basis.family == BasisFamily::Fourier &&
      (grid.lo < -basis.half_width - 1e-12 || grid.hi > basis.half_width + 1e-12))
    throw std::invalid_argument("grid extends beyond the fourier box");
  const Matrix vals = basis_values(basis, grid.nodes);
  return vals * grid.weights.asDiagonal() * vals.transpose();
}

}  // namespace thermal
