// SPDX-License-Identifier: Apache-2.0

#include "irslab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "irslab/errors.hpp"

namespace irslab {

namespace {

// Angles produced by atan2 can overshoot pi/2 by an ulp.
constexpr double kAngleSlack = 1e-12;

void check_angle(double angle, const char* name) {
  if (!(std::abs(angle) <= kPi / 2 + kAngleSlack)) {
    throw std::domain_error(std::string(name) + " must lie in [-pi/2, pi/2], got " +
                            std::to_string(angle));
  }
}

}  // namespace

ArrayGeometry ArrayGeometry::for_carrier(std::size_t nh, std::size_t nv, double carrier_hz,
                                         double spacing_wavelengths) {
  ArrayGeometry g;
  g.nh = nh;
  g.nv = nv;
  g.spacing_wavelengths = spacing_wavelengths;
  g.wavelength_m = kSpeedOfLight / carrier_hz;
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (nh < 1 || nv < 1) {
    throw ConfigError("array must have at least one element per row and column");
  }
  if (!(spacing_wavelengths > 0.0) || !(wavelength_m > 0.0)) {
    throw ConfigError("element spacing and wavelength must be positive");
  }
}

Eigen::Vector3d element_position(std::size_t n, const ArrayGeometry& g) {
  if (n >= g.size()) {
    throw std::out_of_range("element index " + std::to_string(n) + " outside array of " +
                            std::to_string(g.size()));
  }
  const double d = g.spacing_m();
  return {0.0, static_cast<double>(g.horizontal_index(n)) * d,
          static_cast<double>(g.vertical_index(n)) * d};
}

double directivity(double azimuth, double elevation) {
  check_angle(azimuth, "azimuth");
  check_angle(elevation, "elevation");
  const double c = std::cos(azimuth);
  return std::max(0.0, c * c * std::cos(elevation));
}

CVector array_response(double azimuth, double elevation, const ArrayGeometry& g) {
  const double amplitude = std::sqrt(directivity(azimuth, elevation));
  const double k = 2.0 * kPi / g.wavelength_m;
  const Eigen::Vector3d wave{k * std::cos(elevation) * std::cos(azimuth),
                             k * std::cos(elevation) * std::sin(azimuth), k * std::sin(elevation)};
  CVector out(static_cast<Eigen::Index>(g.size()));
  for (std::size_t n = 0; n < g.size(); ++n) {
    out[static_cast<Eigen::Index>(n)] = amplitude * std::exp(kJ * wave.dot(element_position(n, g)));
  }
  return out;
}

CVector array_response_azimuth(double azimuth, const ArrayGeometry& g) {
  check_angle(azimuth, "azimuth");
  const double amplitude = std::max(0.0, std::cos(azimuth));
  const double step = 2.0 * kPi * g.spacing_wavelengths * std::sin(azimuth);

  // Every vertical row repeats the same N_H phases.
  CVector row(static_cast<Eigen::Index>(g.nh));
  for (std::size_t i = 0; i < g.nh; ++i) {
    row[static_cast<Eigen::Index>(i)] = amplitude * std::exp(kJ * (step * static_cast<double>(i)));
  }
  return row.replicate(static_cast<Eigen::Index>(g.nv), 1);
}

std::vector<std::size_t> column_index_map(const ArrayGeometry& g) {
  std::vector<std::size_t> map(g.size());
  for (std::size_t n = 0; n < map.size(); ++n) map[n] = g.horizontal_index(n);
  return map;
}

}  // namespace irslab
