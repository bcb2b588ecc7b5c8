// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "irslab/errors.hpp"
#include "irslab/geometry.hpp"

using namespace irslab;

TEST(Geometry, WavelengthAtFourGigahertz) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(64, 64, 4.0e9);
  EXPECT_DOUBLE_EQ(g.wavelength_m, 0.075);
  EXPECT_DOUBLE_EQ(g.spacing_m(), 0.03);
}

TEST(Geometry, FirstElementAtOrigin) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(64, 64, 4.0e9);
  EXPECT_EQ(element_position(0, g), Eigen::Vector3d::Zero());
}

TEST(Geometry, SecondRowStartsOneSpacingUp) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(64, 64, 4.0e9);
  const Eigen::Vector3d p = element_position(g.nh, g);
  EXPECT_EQ(p.x(), 0.0);
  EXPECT_EQ(p.y(), 0.0);
  EXPECT_NEAR(p.z(), 0.03, 1e-15);
}

TEST(Geometry, LastElementAtFarCorner) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(8, 4, 4.0e9);
  const Eigen::Vector3d p = element_position(g.size() - 1, g);
  EXPECT_NEAR(p.y(), 7 * g.spacing_m(), 1e-15);
  EXPECT_NEAR(p.z(), 3 * g.spacing_m(), 1e-15);
  EXPECT_THROW(element_position(g.size(), g), std::out_of_range);
}

TEST(Geometry, ValidateRejectsEmptyArrays) {
  ArrayGeometry g;
  g.nh = 0;
  EXPECT_THROW(g.validate(), ConfigError);
  g.nh = 2;
  g.spacing_wavelengths = 0.0;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Directivity, SpotValues) {
  EXPECT_DOUBLE_EQ(directivity(0.0, 0.0), 1.0);
  EXPECT_NEAR(directivity(kPi / 2, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(directivity(kPi / 4, kPi / 3), 0.25, 1e-15);
  EXPECT_THROW(directivity(2.0, 0.0), std::domain_error);
  EXPECT_THROW(directivity(0.0, -1.6), std::domain_error);
}

TEST(ArrayResponse, BoresightIsAllOnes) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(4, 3, 4.0e9);
  const CVector a = array_response(0.0, 0.0, g);
  for (Eigen::Index n = 0; n < a.size(); ++n) EXPECT_LT(std::abs(a[n] - 1.0), 1e-15);
}

TEST(ArrayResponse, AzimuthModeMatchesClosedForm) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(6, 3, 4.0e9);
  for (double phi : {-1.2, -0.3, 0.0, 0.7, 1.4}) {
    const CVector a = array_response_azimuth(phi, g);
    const CVector full = array_response(phi, 0.0, g);
    for (std::size_t n = 0; n < g.size(); ++n) {
      const double i = static_cast<double>(g.horizontal_index(n));
      const Complex expected = std::cos(phi) * std::polar(1.0, 0.8 * kPi * std::sin(phi) * i);
      EXPECT_LT(std::abs(a[static_cast<Eigen::Index>(n)] - expected), 1e-13);
      EXPECT_LT(std::abs(full[static_cast<Eigen::Index>(n)] - expected), 1e-13);
    }
  }
}

TEST(ArrayResponse, MagnitudeIsSqrtGain) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(5, 5, 4.0e9);
  for (double az : {-1.0, 0.2, 1.5}) {
    for (double el : {-0.8, 0.0, 0.4}) {
      const CVector a = array_response(az, el, g);
      const double expected = std::sqrt(directivity(az, el));
      for (Eigen::Index n = 0; n < a.size(); ++n) EXPECT_NEAR(std::abs(a[n]), expected, 1e-14);
    }
  }
}

TEST(ColumnIndexMap, TwoByTwo) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(2, 2, 4.0e9);
  EXPECT_EQ(column_index_map(g), (std::vector<std::size_t>{0, 1, 0, 1}));
}

TEST(ColumnIndexMap, SingleColumnIsAllZero) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(1, 5, 4.0e9);
  EXPECT_EQ(column_index_map(g), std::vector<std::size_t>(5, 0));
}

TEST(ColumnIndexMap, VerticalNeighboursShareColumn) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(7, 6, 4.0e9);
  const auto map = column_index_map(g);
  for (std::size_t n = 0; n + g.nh < g.size(); ++n) EXPECT_EQ(map[n], map[n + g.nh]);
}
