#include "thermal/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace thermal {

CorrelatorAccumulator::CorrelatorAccumulator(int n_slices, double beta, long expected_paths,
                                             int n_blocks)
    : n_slices_(n_slices), beta_(beta), expected_paths_(expected_paths) {
  if (n_slices < 1) throw std::invalid_argument("correlator needs at least one slice");
  if (n_blocks < 2) throw std::invalid_argument("jackknife needs at least two blocks");
  if (expected_paths < n_blocks) throw std::invalid_argument("fewer paths than jackknife blocks");
  block_sums_ = Matrix::Zero(n_slices, n_blocks);
  block_counts_ = Vector::Zero(n_blocks);
}

void CorrelatorAccumulator::add(const EuclideanPath& path) {
  if (path.size() != n_slices_) throw std::invalid_argument("path length mismatch");
  const int n_blocks = static_cast<int>(block_counts_.size());
  const int block = static_cast<int>(std::min<long>(n_seen_ * n_blocks / expected_paths_, n_blocks - 1));
  ++n_seen_;
  block_counts_[block] += 1.0;

  // Translation average: c_z = (1/N) sum_z0 q_{z0} q_{z0+z}. The doubled
  // vector turns each lag into a contiguous dot product.
  Vector doubled(2 * n_slices_);
  doubled.head(n_slices_) = path;
  doubled.tail(n_slices_) = path;
  for (int z = 0; z < n_slices_; ++z)
    block_sums_(z, block) += path.dot(doubled.segment(z, n_slices_)) / n_slices_;
}

CorrelatorEstimate CorrelatorAccumulator::finalize() const {
  if (n_seen_ < 100) throw std::runtime_error("too few paths for a correlator estimate");
  const int n_blocks = static_cast<int>(block_counts_.size());
  for (int b = 0; b < n_blocks; ++b)
    if (block_counts_[b] < 1.0) throw std::runtime_error("empty jackknife block");

  const double a = beta_ / n_slices_;
  CorrelatorEstimate est;
  est.beta = beta_;
  est.n_samples = n_seen_;
  est.taus = Vector::LinSpaced(n_slices_, 0.0, a * (n_slices_ - 1));

  const Vector total = block_sums_.rowwise().sum();
  est.values = total / static_cast<double>(n_seen_);

  // Leave-one-block-out means.
  est.errors.setZero(n_slices_);
  Matrix loo(n_slices_, n_blocks);
  for (int b = 0; b < n_blocks; ++b)
    loo.col(b) = (total - block_sums_.col(b)) / (n_seen_ - block_counts_[b]);
  const Vector loo_mean = loo.rowwise().mean();
  for (int z = 0; z < n_slices_; ++z) {
    double ss = 0.0;
    for (int b = 0; b < n_blocks; ++b) {
      const double d = loo(z, b) - loo_mean[z];
      ss += d * d;
    }
    est.errors[z] = std::sqrt(ss * (n_blocks - 1.0) / n_blocks);
  }
  return est;
}

CorrelatorEstimate estimate_correlator(const std::vector<EuclideanPath>& paths, double beta,
                                       int n_blocks) {
  if (paths.size() < 100) throw std::runtime_error("too few paths for a correlator estimate");
  CorrelatorAccumulator acc(static_cast<int>(paths.front().size()), beta,
                            static_cast<long>(paths.size()), n_blocks);
  for (const auto& p : paths) acc.add(p);
  return acc.finalize();
}

namespace {

struct WindowData {
  Vector tau_bar;  // tau - beta/2
  Vector values;
  Vector inv_var;
};

// For fixed dE the model is linear in (A, B): solve the 2x2 weighted normal
// equations and return the resulting chi2.
double profile_chi2(const WindowData& w, double delta_e, double* a_out = nullptr,
                    double* b_out = nullptr) {
  const Eigen::ArrayXd basis = (delta_e * w.tau_bar.array()).cosh();
  const Eigen::ArrayXd wgt = w.inv_var.array();
  const double s_ff = (wgt * basis.square()).sum();
  const double s_f1 = (wgt * basis).sum();
  const double s_11 = wgt.sum();
  const double s_fy = (wgt * basis * w.values.array()).sum();
  const double s_1y = (wgt * w.values.array()).sum();
  const double det = s_ff * s_11 - s_f1 * s_f1;
  if (std::abs(det) < 1e-300) return std::numeric_limits<double>::infinity();
  const double a = (s_fy * s_11 - s_1y * s_f1) / det;
  const double b = (s_1y * s_ff - s_fy * s_f1) / det;
  if (a_out != nullptr) *a_out = a;
  if (b_out != nullptr) *b_out = b;
  const Eigen::ArrayXd resid = w.values.array() - a * basis - b;
  return (wgt * resid.square()).sum();
}

}  // namespace

CoshFit fit_delta_e(const CorrelatorEstimate& corr, double tau_min, double tau_max) {
  if (!(tau_max > tau_min)) throw std::invalid_argument("degenerate fit window");

  WindowData w;
  {
    std::vector<int> idx;
    for (int z = 0; z < corr.taus.size(); ++z)
      if (corr.taus[z] >= tau_min && corr.taus[z] <= tau_max) idx.push_back(z);
    if (idx.size() < 5) throw std::invalid_argument("degenerate fit window");
    w.tau_bar.resize(idx.size());
    w.values.resize(idx.size());
    w.inv_var.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const int z = idx[i];
      if (!(corr.errors[z] > 0.0)) throw std::invalid_argument("fit needs positive errors");
      w.tau_bar[i] = corr.taus[z] - corr.beta / 2.0;
      w.values[i] = corr.values[z];
      w.inv_var[i] = 1.0 / (corr.errors[z] * corr.errors[z]);
    }
  }

  // Scan the dE profile, then refine the best bracket.
  const int n_scan = 400;
  const double de_lo = 0.01, de_hi = 8.0;
  Vector chi2_scan(n_scan);
  int best = 0;
  for (int i = 0; i < n_scan; ++i) {
    const double de = de_lo + (de_hi - de_lo) * i / (n_scan - 1);
    chi2_scan[i] = profile_chi2(w, de);
    if (chi2_scan[i] < chi2_scan[best]) best = i;
  }

  // A second local minimum of comparable depth makes the fit ambiguous.
  bool ambiguous = false;
  for (int i = 1; i + 1 < n_scan; ++i) {
    if (std::abs(i - best) <= 1) continue;
    if (chi2_scan[i] < chi2_scan[i - 1] && chi2_scan[i] < chi2_scan[i + 1] &&
        chi2_scan[i] < chi2_scan[best] + 1.0)
      ambiguous = true;
  }

  const double step = (de_hi - de_lo) / (n_scan - 1);
  double lo = std::max(de_lo, de_lo + step * (best - 1));
  double hi = std::min(de_hi, de_lo + step * (best + 1));
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  while (hi - lo > 1e-10) {
    if (profile_chi2(w, c) < profile_chi2(w, d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }

  CoshFit fit;
  fit.delta_e = (lo + hi) / 2.0;
  fit.chi2 = profile_chi2(w, fit.delta_e, &fit.a_coeff, &fit.b_coeff);
  fit.dof = static_cast<int>(w.values.size()) - 3;
  fit.ambiguous = ambiguous;
  fit.window_lo = tau_min;
  fit.window_hi = tau_max;

  // Local quadratic shape of chi2: cov = 2 H^{-1}.
  auto chi2_at = [&](double a, double b, double de) {
    const Eigen::ArrayXd basis = (de * w.tau_bar.array()).cosh();
    const Eigen::ArrayXd resid = w.values.array() - a * basis - b;
    return (w.inv_var.array() * resid.square()).sum();
  };
  const double ha = std::max(1e-7, 1e-5 * std::abs(fit.a_coeff));
  const double hb = std::max(1e-7, 1e-5 * std::abs(fit.b_coeff));
  const double hd = std::max(1e-7, 1e-5 * fit.delta_e);
  const Eigen::Vector3d h(ha, hb, hd);
  Eigen::Vector3d x0(fit.a_coeff, fit.b_coeff, fit.delta_e);
  auto eval = [&](const Eigen::Vector3d& x) { return chi2_at(x[0], x[1], x[2]); };
  Eigen::Matrix3d hess;
  const double f0 = eval(x0);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Eigen::Vector3d xpp = x0, xpm = x0, xmp = x0, xmm = x0;
      xpp[i] += h[i]; xpp[j] += h[j];
      xpm[i] += h[i]; xpm[j] -= h[j];
      xmp[i] -= h[i]; xmp[j] += h[j];
      xmm[i] -= h[i]; xmm[j] -= h[j];
      if (i == j) {
        Eigen::Vector3d xp = x0, xm = x0;
        xp[i] += h[i];
        xm[i] -= h[i];
        hess(i, i) = (eval(xp) - 2.0 * f0 + eval(xm)) / (h[i] * h[i]);
      } else {
        hess(i, j) = (eval(xpp) - eval(xpm) - eval(xmp) + eval(xmm)) / (4.0 * h[i] * h[j]);
        hess(j, i) = hess(i, j);
      }
    }
  }
  fit.covariance = 2.0 * hess.inverse();
  fit.delta_e_error = std::sqrt(std::max(0.0, fit.covariance(2, 2)));
  return fit;
}

}  // namespace thermal
