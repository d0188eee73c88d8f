#pragma once

#include "thermal/hamiltonian.hpp"
#include "thermal/spectrum.hpp"
#include "thermal/types.hpp"

namespace thermal {

// Cyclic Jacobi diagonalization of a symmetric matrix: rotations sweep all
// (p, q) pairs until the largest off-diagonal entry falls below 1e-12.
// Eigenvalues ascending, eigenvector columns orthonormal.
SpectrumResult jacobi_diagonalize(const Matrix& h);

// Ground truth for a potential: dense diagonalization in a large Hermite
// basis. Convergence is certified by re-running with big_m + 20 basis
// functions and requiring the lowest eigenvalues to agree within 1e-7.
SpectrumResult reference_spectrum(const Potential& v, int big_m = 120);

// Closed-form harmonic-oscillator thermal kernel
//   rho_T(y, x) = sinh(b/2)/sqrt(pi/2 sinh b) exp[-(y^2+x^2) coth(b)/2 + xy/sinh(b)],
// trace-normalized.
double harmonic_thermal_density(double x, double y, double beta);

// Partial eigenstate-sum approximation (1/Z) sum_{n<n_terms} e^{-E_n beta}
// H_n(x) H_n(y) with the exact Z = 1/(2 sinh(beta/2)); converges to the
// closed form as n_terms grows.
double harmonic_mixture_check(double x, double y, double beta, int n_terms);

}  // namespace thermal
