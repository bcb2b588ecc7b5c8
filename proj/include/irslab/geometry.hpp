// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "irslab/types.hpp"

namespace irslab {

/// Propagation speed used to derive the carrier wavelength (7.5 cm at 4 GHz).
inline constexpr double kSpeedOfLight = 3.0e8;

/// Uniform planar array in the yz-plane, first element at the origin,
/// indexed row by row: element n sits in horizontal column i(n) = n mod N_H
/// and vertical row j(n) = n / N_H (all indices 0-based).
struct ArrayGeometry {
  std::size_t nh = 64;
  std::size_t nv = 64;
  double spacing_wavelengths = 0.4;
  double wavelength_m = kSpeedOfLight / 4.0e9;

  static ArrayGeometry for_carrier(std::size_t nh, std::size_t nv, double carrier_hz,
                                   double spacing_wavelengths = 0.4);

  std::size_t size() const { return nh * nv; }
  std::size_t horizontal_index(std::size_t n) const { return n % nh; }
  std::size_t vertical_index(std::size_t n) const { return n / nh; }
  double spacing_m() const { return spacing_wavelengths * wavelength_m; }

  /// Throws ConfigError unless nh, nv >= 1 and spacing, wavelength > 0.
  void validate() const;
};

/// Position [0, i(n) d, j(n) d] in metres of the element with 0-based index n.
/// Throws std::out_of_range for n >= N.
Eigen::Vector3d element_position(std::size_t n, const ArrayGeometry& g);

/// Element gain cos^2(azimuth) cos(elevation). Angles in radians, each
/// restricted to [-pi/2, pi/2]; anything else is a std::domain_error.
double directivity(double azimuth, double elevation);

/// Plane-wave response sqrt(G) exp(j k^T u_n) for all elements.
CVector array_response(double azimuth, double elevation, const ArrayGeometry& g);

/// Response for waves in the horizontal plane:
/// cos(azimuth) exp(j 2 pi spacing sin(azimuth) i(n)).
CVector array_response_azimuth(double azimuth, const ArrayGeometry& g);

/// i(n) for every element; the grouping used by dimension reduction.
std::vector<std::size_t> column_index_map(const ArrayGeometry& g);

}  // namespace irslab
