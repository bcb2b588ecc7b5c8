// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace irslab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kJ{0.0, 1.0};

}  // namespace irslab
