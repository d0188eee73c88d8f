#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermal/spectrum.hpp"

namespace thermal {

// Configuration problems exit with code 2; runtime failures with 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  nlohmann::json settings;  // fully resolved: defaults + file + overrides
  std::uint64_t hash = 0;   // config hash embedded in every output
};

// Defaults for a command (hyperparameters follow the anharmonic experiment
// setup: QVI on 40 Fourier modes with c_perp = 1e3, QML batches of 500 with
// c_perp = 1e2, Adam at learning rate 1e-3, lattice at beta = 10 with 160
// slices).
nlohmann::json default_config(const std::string& command);

// Resolves defaults <- optional config file <- dotted "key=value" overrides,
// validating types and rejecting unknown keys by name.
RunConfig parse_config(const std::string& command, const std::string& config_path,
                       const std::vector<std::string>& overrides);

// Executes the command, writing outputs under settings["out"]. Returns the
// process exit code (0 ok, 1 runtime failure, 2 config error).
int run(const RunConfig& config);

struct CompareReport {
  Vector gap_fractional_diff;  // per common state, 0 for the ground state
  Vector l2_distance;          // sign-aligned, empty when either side lacks states
  int n_states = 0;
};

// Per-state fractional eigenvalue-gap differences and L^2 distances
// int |psi_a - psi_b|^2 dx on a shared grid, with sign alignment.
CompareReport compare_results(const SpectrumResult& a, const SpectrumResult& b, double grid_lo,
                              double grid_hi, int grid_points, int n_states = 0);

}  // namespace thermal
