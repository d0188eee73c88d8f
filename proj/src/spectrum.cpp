#include "thermal/spectrum.hpp"

#include <stdexcept>

#include "thermal/hamiltonian.hpp"
#include "thermal/vdm.hpp"

namespace thermal {

Vector evaluate_state(const SpectrumResult& result, int n, const Vector& xs) {
  if (!result.basis) throw std::runtime_error("spectrum result carries no basis");
  if (n < 0 || n >= result.eigenvectors.cols()) throw std::invalid_argument("state index out of range");
  Matrix values;
  if (result.flow) {
    values = flowed_basis_values(*result.basis, *result.flow, xs).values;
  } else {
    values = basis_values(*result.basis, xs);
  }
  return values.transpose() * result.eigenvectors.col(n);
}

nlohmann::json spectrum_to_json(const SpectrumResult& result) {
  nlohmann::json j;
  j["method"] = result.method;
  j["eigenvalues"] = std::vector<double>(result.eigenvalues.data(),
                                         result.eigenvalues.data() + result.eigenvalues.size());
  j["gaps"] = std::vector<double>(result.gaps.data(), result.gaps.data() + result.gaps.size());
  if (result.eigenvectors.size() > 0) {
    std::vector<std::vector<double>> rows(result.eigenvectors.rows());
    for (Eigen::Index r = 0; r < result.eigenvectors.rows(); ++r) {
      rows[r].resize(result.eigenvectors.cols());
      for (Eigen::Index c = 0; c < result.eigenvectors.cols(); ++c) rows[r][c] = result.eigenvectors(r, c);
    }
    j["eigenvectors"] = rows;
  }
  if (result.basis) j["basis"] = basis_to_json(*result.basis);
  if (result.flow) j["flow"] = flow_to_json(*result.flow);
  j["diagnostics"] = result.diagnostics;
  return j;
}

SpectrumResult spectrum_from_json(const nlohmann::json& j) {
  SpectrumResult r;
  r.method = j.at("method").get<std::string>();
  const auto eig = j.at("eigenvalues").get<std::vector<double>>();
  r.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Eigen::Index>(eig.size()));
  const auto gaps = j.at("gaps").get<std::vector<double>>();
  r.gaps = Eigen::Map<const Vector>(gaps.data(), static_cast<Eigen::Index>(gaps.size()));
  if (j.contains("eigenvectors")) {
    const auto rows = j.at("eigenvectors").get<std::vector<std::vector<double>>>();
    if (!rows.empty()) {
      r.eigenvectors.resize(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(rows.front().size()));
      for (Eigen::Index rr = 0; rr < r.eigenvectors.rows(); ++rr)
        for (Eigen::Index c = 0; c < r.eigenvectors.cols(); ++c) r.eigenvectors(rr, c) = rows[rr][c];
    }
  }
  if (j.contains("basis")) r.basis = basis_from_json(j.at("basis"));
  if (j.contains("flow")) r.flow = flow_from_json(j.at("flow"));
  if (j.contains("diagnostics"))
    r.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
  return r;
}

}  // namespace thermal
