#include "thermal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace thermal {

namespace {

constexpr double kOffDiagTol = 1e-12;
constexpr int kMaxSweeps = 100;

double max_off_diagonal(const Matrix& a) {
  double m = 0.0;
  for (Eigen::Index p = 0; p < a.rows(); ++p)
    for (Eigen::Index q = p + 1; q < a.cols(); ++q) m = std::max(m, std::abs(a(p, q)));
  return m;
}

}  // namespace

SpectrumResult jacobi_diagonalize(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("jacobi: matrix must be square");
  const Eigen::Index m = h.rows();
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("jacobi: matrix must be symmetric");

  Matrix a = (h + h.transpose()) / 2.0;
  Matrix v = Matrix::Identity(m, m);

  int sweep = 0;
  while (max_off_diagonal(a) >= kOffDiagTol) {
    if (++sweep > kMaxSweeps) throw std::runtime_error("jacobi: no convergence in 100 sweeps");
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < kOffDiagTol / (10.0 * m)) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SpectrumResult result;
  result.method = "oracle";
  result.eigenvalues.resize(m);
  result.eigenvectors.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    result.eigenvalues[i] = a(order[i], order[i]);
    result.eigenvectors.col(i) = v.col(order[i]);
  }
  result.gaps = result.eigenvalues.array() - result.eigenvalues[0];
  result.diagnostics["jacobi_sweeps"] = sweep;
  return result;
}

SpectrumResult reference_spectrum(const Potential& v, int big_m) {
  if (big_m < 2) throw std::invalid_argument("reference basis too small");

  auto solve = [&](int m) {
    const BasisSet basis = BasisSet::hermite(m);
    const QuadratureGrid grid = make_grid(basis, std::max(256, 8 * m));
    return jacobi_diagonalize(matrix_elements(v, basis, grid));
  };

  SpectrumResult coarse = solve(big_m);
  const SpectrumResult fine = solve(big_m + 20);
  const int n_check = std::min<int>(10, big_m);
  for (int n = 0; n < n_check; ++n) {
    if (std::abs(coarse.eigenvalues[n] - fine.eigenvalues[n]) > 1e-7)
      throw std::runtime_error("unconverged reference");
  }

  coarse.basis = BasisSet::hermite(big_m);
  coarse.diagnostics["big_m"] = big_m;
  coarse.diagnostics["certification_delta"] =
      (coarse.eigenvalues.head(n_check) - fine.eigenvalues.head(n_check)).cwiseAbs().maxCoeff();
  return coarse;
}

double harmonic_thermal_density(double x, double y, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  const double pref = std::sinh(beta / 2.0) / std::sqrt(M_PI / 2.0 * std::sinh(beta));
  const double coth = std::cosh(beta) / std::sinh(beta);
  return pref * std::exp(-(y * y + x * x) * coth / 2.0 + x * y / std::sinh(beta));
}

double harmonic_mixture_check(double x, double y, double beta, int n_terms) {
  if (n_terms < 1) throw std::invalid_argument("n_terms must be >= 1");
  const double z = 1.0 / (2.0 * std::sinh(beta / 2.0));
  double sum = 0.0;
  for (int n = 0; n < n_terms; ++n)
    sum += std::exp(-(n + 0.5) * beta) * hermite_function(n, x) * hermite_function(n, y);
  return sum / z;
}

}  // namespace thermal
