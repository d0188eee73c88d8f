#pragma once

#include <Eigen/Dense>

namespace thermal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace thermal
