#pragma once

#include <cmath>
#include <stdexcept>

#include "thermal/types.hpp"

namespace thermal {

enum class BasisFamily { Hermite, Fourier };

// Highest Hermite order the normalized recurrence is allowed to reach before
// we refuse with "basis order overflow".
inline constexpr int kMaxHermiteOrder = 256;

// An orthonormal family of real single-particle wavefunctions. Hermite
// functions live on the whole line; Fourier modes on the box [-L, L].
struct BasisSet {
  BasisFamily family = BasisFamily::Hermite;
  int size = 1;             // number of basis functions M
  double half_width = 0.0;  // L, Fourier only

  BasisSet() = default;
  BasisSet(BasisFamily fam, int m, double l = 0.0);

  static BasisSet hermite(int m) { return BasisSet(BasisFamily::Hermite, m); }
  static BasisSet fourier(int m, double l) { return BasisSet(BasisFamily::Fourier, m, l); }
};

struct QuadratureGrid {
  Vector nodes;    // strictly increasing
  Vector weights;  // all positive
  double lo = 0.0;
  double hi = 0.0;
};

// Normalized Hermite function H_n(x) = (2^n n! sqrt(pi))^(-1/2) e^(-x^2/2) h_n(x),
// evaluated with the three-term recurrence on the normalized functions:
//   H_{n+1} = x sqrt(2/(n+1)) H_n - sqrt(n/(n+1)) H_{n-1}.
template <class Scalar = double>
Scalar hermite_function(int n, Scalar x, int max_order = kMaxHermiteOrder) {
  if (n < 0 || n >= max_order) throw std::invalid_argument("basis order overflow");
  using std::exp;
  using std::sqrt;
  const Scalar h0 = Scalar(0.7511255444649424828587030047762276930510L) * exp(-x * x / Scalar(2));
  if (n == 0) return h0;
  Scalar prev = h0;
  Scalar cur = x * sqrt(Scalar(2)) * h0;
  for (int k = 1; k < n; ++k) {
    const Scalar next = x * sqrt(Scalar(2) / Scalar(k + 1)) * cur - sqrt(Scalar(k) / Scalar(k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// d/dx of the normalized Hermite function, via the exact ladder relation
// H_n' = sqrt(n/2) H_{n-1} - sqrt((n+1)/2) H_{n+1}.
double hermite_function_derivative(int n, double x, int max_order = kMaxHermiteOrder);

// Fourier mode on [-L, L] with the indexing convention
//   j = 0: 1/sqrt(2L),  j = 2k-1: sin(k pi x / L)/sqrt(L),  j = 2k: cos(k pi x / L)/sqrt(L).
double fourier_mode(int j, double x, double L);
double fourier_mode_derivative(int j, double x, double L);

// Pointwise evaluation of basis function j. Fourier modes raise a domain
// error outside the box; the _or_zero variants return 0 there instead, which
// is how sampled endpoints that exit the box enter the QML objective.
double basis_value(const BasisSet& basis, int j, double x);
double basis_value_or_zero(const BasisSet& basis, int j, double x);
double basis_derivative(const BasisSet& basis, int j, double x);
double basis_second_derivative(const BasisSet& basis, int j, double x);

// All basis values at once: result(j, i) = psi_j(xs[i]). Out-of-box Fourier
// points evaluate to 0.
Matrix basis_values(const BasisSet& basis, const Vector& xs);
Matrix basis_derivatives(const BasisSet& basis, const Vector& xs);
Matrix basis_second_derivatives(const BasisSet& basis, const Vector& xs);

// Quadrature adequate for products of basis functions (and polynomial
// potentials against them): composite 8-point Gauss-Legendre panels for the
// Fourier box, uniform trapezoid on [-R, R] for Hermite. `resolution` is the
// total node count (rounded up to a full panel for Fourier). half_width
// overrides the Hermite R; 0 picks max(12, 1.4 sqrt(2M+1) + 2).
QuadratureGrid make_grid(const BasisSet& basis, int resolution, double half_width = 0.0);

// Gram matrix of the basis on the grid; identity to quadrature tolerance.
Matrix gram_matrix(const BasisSet& basis, const QuadratureGrid& grid);

}  // namespace thermal
