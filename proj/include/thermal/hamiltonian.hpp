#pragma once

#include "thermal/basis.hpp"
#include "thermal/flow.hpp"
#include "thermal/types.hpp"
#include "thermal/vdm.hpp"

namespace thermal {

// Confining 1-D potentials. All supported kinds are polynomial in x.
struct Potential {
  enum class Kind { Harmonic, AnharmonicPaper, Polynomial };

  Kind kind = Kind::Harmonic;
  Vector coeffs;  // ascending powers, Polynomial only

  static Potential harmonic() { return Potential{Kind::Harmonic, {}}; }
  static Potential anharmonic_paper() { return Potential{Kind::AnharmonicPaper, {}}; }
  static Potential polynomial(Vector c);
};

double potential_eval(const Potential& v, double x);
Vector potential_eval(const Potential& v, const Vector& xs);

// Location of the global minimum (coarse scan + golden-section refine); used
// to center sampler walker initialization.
double potential_minimum_location(const Potential& v);

// Basis values and first derivatives of the flow-transformed states
// phi_j(x) = psi_j(f(x)) sqrt(f'(x)) on a set of points.
struct FlowedBasisValues {
  Vector fx;       // f(x)
  Vector g;        // f'(x)
  Vector gp;       // f''(x)
  Matrix values;   // M x n, phi_j(x_i)
  Matrix derivs;   // M x n, phi_j'(x_i)
};

FlowedBasisValues flowed_basis_values(const BasisSet& basis, const FlowMap& flow, const Vector& xs);

// H_{jj'} = 1/2 int psi_j' psi_j'' dx ... precisely: the kinetic entry is the
// symmetric first-derivative form 1/2 int (d psi_j/dx)(d psi_j'/dx) dx, plus
// int V psi_j psi_j' dx. With a flow, both pieces are evaluated on the
// flow-transformed states. Exact shortcuts: Fourier kinetic is diagonal
// (k pi / L)^2 / 2; Hermite basis under the harmonic potential gives the
// full diagonal j + 1/2.
Matrix matrix_elements(const Potential& v, const BasisSet& basis, const QuadratureGrid& grid,
                       const FlowMap* flow = nullptr);

// Tr[rho H] = sum_n p_n c_n^T H c_n for the variational density matrix.
double variational_energy(const Matrix& h, const VariationalDensityMatrix& vdm);

}  // namespace thermal
