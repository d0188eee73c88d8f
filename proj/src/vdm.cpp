#include "thermal/vdm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermal {

Matrix normalize_columns(Matrix coeffs) {
  for (Eigen::Index n = 0; n < coeffs.cols(); ++n) {
    const double norm = coeffs.col(n).norm();
    if (!(norm > 0.0)) throw std::runtime_error("collapsed state");
    coeffs.col(n) /= norm;
  }
  return coeffs;
}

double orthogonality_penalty(const Matrix& coeffs) {
  const Matrix gram = coeffs.transpose() * coeffs;
  double penalty = 0.0;
  for (Eigen::Index n = 0; n < gram.rows(); ++n)
    for (Eigen::Index m = n + 1; m < gram.cols(); ++m) penalty += gram(n, m) * gram(n, m);
  return penalty;
}

Matrix orthogonality_penalty_gradient(const Matrix& coeffs) {
  // d/da_{j,n} sum_{n<m} (c_n.c_m)^2 = 2 sum_{m != n} (c_n.c_m) a_{j,m}
  Matrix gram = coeffs.transpose() * coeffs;
  gram.diagonal().setZero();
  return 2.0 * coeffs * gram;
}

Vector softmax_weights(const Vector& logits) {
  const double shift = logits.maxCoeff();
  Vector p = (logits.array() - shift).exp();
  p /= p.sum();
  return p;
}

double entropy_diag(const Vector& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s -= p[i] * std::log(p[i]);
  }
  return s;
}

double qre_diag(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("qre_diag: size mismatch");
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw std::runtime_error("support mismatch");
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

Vector eigenvalue_report(const BoltzmannWeights& weights) {
  const Vector p = softmax_weights(weights.logits);
  const double log_pmax = std::log(p.maxCoeff());
  Vector gaps(p.size());
  for (Eigen::Index n = 0; n < p.size(); ++n)
    gaps[n] = -weights.temperature * (std::log(p[n]) - log_pmax);
  std::sort(gaps.data(), gaps.data() + gaps.size());
  return gaps;
}

nlohmann::json basis_to_json(const BasisSet& basis) {
  nlohmann::json j;
  j["family"] = basis.family == BasisFamily::Hermite ? "hermite" : "fourier";
  j["size"] = basis.size;
  if (basis.family == BasisFamily::Fourier) j["half_width"] = basis.half_width;
  return j;
}

BasisSet basis_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  const int size = j.at("size").get<int>();
  if (family == "hermite") return BasisSet::hermite(size);
  if (family == "fourier") return BasisSet::fourier(size, j.at("half_width").get<double>());
  throw std::invalid_argument("unknown basis family: " + family);
}

nlohmann::json flow_to_json(const FlowMap& flow) {
  nlohmann::json j;
  j["variant"] = flow.variant == FlowVariant::PaperSum ? "paper_sum" : "affine_plus_sum";
  j["lo"] = flow.lo;
  j["hi"] = flow.hi;
  j["coefficients"] = std::vector<double>(flow.coeffs.data(), flow.coeffs.data() + flow.coeffs.size());
  return j;
}

FlowMap flow_from_json(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  FlowVariant v;
  if (variant == "paper_sum") {
    v = FlowVariant::PaperSum;
  } else if (variant == "affine_plus_sum") {
    v = FlowVariant::AffinePlusSum;
  } else {
    throw std::invalid_argument("unknown flow variant: " + variant);
  }
  const auto coeffs = j.at("coefficients").get<std::vector<double>>();
  return FlowMap(v, j.at("lo").get<double>(), j.at("hi").get<double>(),
                 Eigen::Map<const Vector>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size())));
}

nlohmann::json to_json(const VariationalDensityMatrix& vdm) {
  nlohmann::json j;
  j["basis"] = basis_to_json(vdm.basis);
  std::vector<std::vector<double>> rows(vdm.coefficients.rows());
  for (Eigen::Index r = 0; r < vdm.coefficients.rows(); ++r) {
    rows[r].resize(vdm.coefficients.cols());
    for (Eigen::Index c = 0; c < vdm.coefficients.cols(); ++c) rows[r][c] = vdm.coefficients(r, c);
  }
  j["coefficients"] = rows;
  j["logits"] = std::vector<double>(vdm.weights.logits.data(),
                                    vdm.weights.logits.data() + vdm.weights.logits.size());
  j["temperature"] = vdm.weights.temperature;
  j["p_perp"] = vdm.weights.p_perp;
  if (vdm.flow) j["flow"] = flow_to_json(*vdm.flow);
  return j;
}

VariationalDensityMatrix vdm_from_json(const nlohmann::json& j) {
  VariationalDensityMatrix vdm;
  vdm.basis = basis_from_json(j.at("basis"));
  const auto rows = j.at("coefficients").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw std::invalid_argument("coefficient matrix must not be empty");
  vdm.coefficients.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < vdm.coefficients.rows(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(vdm.coefficients.cols()))
      throw std::invalid_argument("ragged coefficient matrix");
    for (Eigen::Index c = 0; c < vdm.coefficients.cols(); ++c) vdm.coefficients(r, c) = rows[r][c];
  }
  const auto logits = j.at("logits").get<std::vector<double>>();
  vdm.weights.logits = Eigen::Map<const Vector>(logits.data(), static_cast<Eigen::Index>(logits.size()));
  vdm.weights.temperature = j.at("temperature").get<double>();
  vdm.weights.p_perp = j.value("p_perp", 1e-6);
  if (j.contains("flow")) vdm.flow = flow_from_json(j.at("flow"));
  return vdm;
}

}  // namespace thermal
