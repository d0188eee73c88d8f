#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "thermal/basis.hpp"
#include "thermal/flow.hpp"
#include "thermal/types.hpp"

namespace thermal {

// Common output of the oracle diagonalizer, QVI, QML, and the lattice fit.
// `eigenvalues` are absolute when the method identifies them (oracle, QVI
// Rayleigh energies); QML and the lattice only know gaps, so for them the
// eigenvalues are reported relative to the lowest state.
struct SpectrumResult {
  std::string method;  // "oracle" | "qvi" | "qml" | "lattice"
  Vector eigenvalues;  // ascending
  Vector gaps;         // eigenvalues - eigenvalues[0]
  Matrix eigenvectors; // M x N basis coefficients, empty for lattice
  std::optional<BasisSet> basis;
  std::optional<FlowMap> flow;
  std::map<std::string, double> diagnostics;

  int n_states() const { return static_cast<int>(gaps.size()); }
};

// psi_n on a set of points, reconstructed from basis coefficients (and flow,
// when present). Requires eigenvectors and a basis spec.
Vector evaluate_state(const SpectrumResult& result, int n, const Vector& xs);

nlohmann::json spectrum_to_json(const SpectrumResult& result);
SpectrumResult spectrum_from_json(const nlohmann::json& j);

}  // namespace thermal
