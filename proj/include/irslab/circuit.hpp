// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "irslab/geometry.hpp"
#include "irslab/types.hpp"

namespace irslab {

/// Lumped-element model of one surface element. SI units throughout.
struct CircuitParams {
  double l1_h = 2.8e-9;
  double l2_h = 0.8e-9;
  double r_ohm = 1.0;
  double z0_ohm = 377.0;
  double c_off_f = 0.37e-12;
  double c_on_f = 0.5e-12;

  /// Throws ConfigError unless every value is positive (R may be zero for
  /// the lossless variant) and C_off < C_on.
  void validate() const;
};

enum class ElementState : std::uint8_t { Off = 0, On = 1 };

using StateVector = std::vector<ElementState>;

/// Pilot signs and configuration vectors share one mapping: +1 is On.
inline constexpr ElementState kPlusOneState = ElementState::On;

inline ElementState state_from_sign(int sign) {
  return sign > 0 ? kPlusOneState
                  : (kPlusOneState == ElementState::On ? ElementState::Off : ElementState::On);
}

inline int sign_from_state(ElementState s) { return s == kPlusOneState ? 1 : -1; }

double intended_capacitance(ElementState s, const CircuitParams& params);

/// Z(C, f) = jwL1 (jwL2 + 1/(jwC) + R) / (jwL1 + jwL2 + 1/(jwC) + R).
/// Throws std::domain_error for non-positive C or f.
Complex impedance(double capacitance_f, double frequency_hz, const CircuitParams& params);

/// (Z - Z0) / (Z + Z0).
Complex reflection_coefficient(double capacitance_f, double frequency_hz,
                               const CircuitParams& params);

/// Reflection coefficient of one state over a frequency grid (diagnostic sweep).
CVector reflection_sweep(ElementState state, std::span<const double> frequencies_hz,
                         const CircuitParams& params);

/// Row-stochastic leakage weights: row n holds 100^(-d_{n,i}/lambda) normalized
/// over i. Entries below `truncation` times the diagonal are dropped before
/// normalization; truncation = 0 keeps the dense kernel.
class CouplingKernel {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  static constexpr double kDefaultTruncation = 1e-9;

  static CouplingKernel build(const ArrayGeometry& g, double truncation = kDefaultTruncation);

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  double weight(std::size_t n, std::size_t i) const;
  const Matrix& matrix() const { return weights_; }

 private:
  explicit CouplingKernel(Matrix w) : weights_(std::move(w)) {}
  Matrix weights_;
};

/// C_n = sum_i C~_i w[n][i]. Throws std::invalid_argument on size mismatch.
RVector effective_capacitances(const StateVector& intended, const CouplingKernel& kernel,
                               const CircuitParams& params);

/// omega_theta: element-wise reflection coefficient at the carrier. With
/// coupling disabled each element sees its intended capacitance.
CVector reflection_vector(const StateVector& intended, const CouplingKernel& kernel,
                          const CircuitParams& params, double carrier_hz, bool coupling_enabled);

}  // namespace irslab
