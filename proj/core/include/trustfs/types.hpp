#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace trustfs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Floor applied to every multiplicative-update denominator.
inline constexpr double kDenominatorFloor = 1e-12;

}  // namespace trustfs
