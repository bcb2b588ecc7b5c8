// SPDX-License-Identifier: Apache-2.0

#include "irslab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "irslab/errors.hpp"

namespace irslab {

void CircuitParams::validate() const {
  if (!(l1_h > 0.0) || !(l2_h > 0.0) || !(r_ohm >= 0.0) || !(z0_ohm > 0.0) || !(c_off_f > 0.0) ||
      !(c_on_f > 0.0)) {
    throw ConfigError("circuit parameters must be positive");
  }
  if (!(c_off_f < c_on_f)) throw ConfigError("C_off must be smaller than C_on");
}

double intended_capacitance(ElementState s, const CircuitParams& params) {
  return s == ElementState::On ? params.c_on_f : params.c_off_f;
}

Complex impedance(double capacitance_f, double frequency_hz, const CircuitParams& params) {
  if (!(capacitance_f > 0.0)) {
    throw std::domain_error("capacitance must be positive, got " + std::to_string(capacitance_f));
  }
  if (!(frequency_hz > 0.0)) {
    throw std::domain_error("frequency must be positive, got " + std::to_string(frequency_hz));
  }
  const Complex jw = kJ * (2.0 * kPi * frequency_hz);
  const Complex series = jw * params.l2_h + 1.0 / (jw * capacitance_f) + params.r_ohm;
  const Complex shunt = jw * params.l1_h;
  return shunt * series / (shunt + series);
}

Complex reflection_coefficient(double capacitance_f, double frequency_hz,
                               const CircuitParams& params) {
  const Complex z = impedance(capacitance_f, frequency_hz, params);
  const Complex denominator = z + params.z0_ohm;
  if (denominator == Complex{0.0, 0.0}) {
    throw std::domain_error("element impedance equals -Z0; reflection coefficient is singular");
  }
  return (z - params.z0_ohm) / denominator;
}

CVector reflection_sweep(ElementState state, std::span<const double> frequencies_hz,
                         const CircuitParams& params) {
  CVector out(static_cast<Eigen::Index>(frequencies_hz.size()));
  const double c = intended_capacitance(state, params);
  for (std::size_t k = 0; k < frequencies_hz.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = reflection_coefficient(c, frequencies_hz[k], params);
  }
  return out;
}

CouplingKernel CouplingKernel::build(const ArrayGeometry& g, double truncation) {
  g.validate();
  const auto nh = static_cast<long>(g.nh);
  const auto nv = static_cast<long>(g.nv);
  const double s = g.spacing_wavelengths;

  // Unnormalized weight 100^(-r s) for a lattice offset of length r.
  // Offsets beyond the truncation radius are skipped without evaluation.
  long radius = std::max(nh, nv);
  if (truncation > 0.0) {
    const double r_max = -std::log(truncation) / (std::log(100.0) * s);
    radius = std::min(radius, static_cast<long>(std::floor(r_max)));
  }

  std::vector<Eigen::Triplet<double>> entries;
  const auto window = static_cast<std::size_t>(2 * radius + 1);
  entries.reserve(g.size() * std::min(g.size(), window * window));

  std::vector<Eigen::Triplet<double>> row;
  for (long j = 0; j < nv; ++j) {
    for (long i = 0; i < nh; ++i) {
      row.clear();
      double total = 0.0;
      const long n = j * nh + i;
      for (long jj = std::max(0L, j - radius); jj <= std::min(nv - 1, j + radius); ++jj) {
        for (long ii = std::max(0L, i - radius); ii <= std::min(nh - 1, i + radius); ++ii) {
          const double r = std::hypot(static_cast<double>(ii - i), static_cast<double>(jj - j));
          const double w = std::pow(100.0, -r * s);
          if (w < truncation) continue;
          row.emplace_back(n, jj * nh + ii, w);
          total += w;
        }
      }
      for (const auto& t : row) entries.emplace_back(t.row(), t.col(), t.value() / total);
    }
  }

  Matrix w(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  w.setFromTriplets(entries.begin(), entries.end());
  w.makeCompressed();
  return CouplingKernel(std::move(w));
}

double CouplingKernel::weight(std::size_t n, std::size_t i) const {
  return weights_.coeff(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i));
}

RVector effective_capacitances(const StateVector& intended, const CouplingKernel& kernel,
                               const CircuitParams& params) {
  if (intended.size() != kernel.size()) {
    throw std::invalid_argument("state vector has " + std::to_string(intended.size()) +
                                " entries but coupling kernel has " +
                                std::to_string(kernel.size()));
  }
  RVector on(static_cast<Eigen::Index>(intended.size()));
  for (std::size_t n = 0; n < intended.size(); ++n) {
    on[static_cast<Eigen::Index>(n)] = intended[n] == ElementState::On ? 1.0 : 0.0;
  }
  const RVector on_share = kernel.matrix() * on;
  const RVector off_share = kernel.matrix() * (RVector::Ones(on.size()) - on);

  // Offset from whichever endpoint carries less weight, so uniform
  // surfaces land exactly on C_off or C_on.
  const double delta = params.c_on_f - params.c_off_f;
  RVector actual(on.size());
  for (Eigen::Index n = 0; n < on.size(); ++n) {
    actual[n] = on_share[n] <= off_share[n] ? params.c_off_f + delta * on_share[n]
                                            : params.c_on_f - delta * off_share[n];
  }
  return actual.cwiseMax(params.c_off_f).cwiseMin(params.c_on_f);
}

CVector reflection_vector(const StateVector& intended, const CouplingKernel& kernel,
                          const CircuitParams& params, double carrier_hz, bool coupling_enabled) {
  if (!coupling_enabled) {
    if (intended.size() != kernel.size()) {
      throw std::invalid_argument("state vector length does not match the array");
    }
    const Complex on = reflection_coefficient(params.c_on_f, carrier_hz, params);
    const Complex off = reflection_coefficient(params.c_off_f, carrier_hz, params);
    CVector omega(static_cast<Eigen::Index>(intended.size()));
    for (std::size_t n = 0; n < intended.size(); ++n) {
      omega[static_cast<Eigen::Index>(n)] = intended[n] == ElementState::On ? on : off;
    }
    return omega;
  }
  const RVector c = effective_capacitances(intended, kernel, params);
  CVector omega(c.size());
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    omega[n] = reflection_coefficient(c[n], carrier_hz, params);
  }
  return omega;
}

}  // namespace irslab
