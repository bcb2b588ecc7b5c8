// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "irslab/errors.hpp"
#include "irslab/io.hpp"

using namespace irslab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("irslab_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CMatrix random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(MatrixCodec, EmptyRoundTrip) {
  const CMatrix m(0, 0);
  const auto bytes = io::encode_matrix(m);
  EXPECT_EQ(bytes.size(), io::kMatrixHeaderBytes);
  const CMatrix back = io::decode_complex_matrix(bytes);
  EXPECT_EQ(back.rows(), 0);
  EXPECT_EQ(back.cols(), 0);
}

TEST(MatrixCodec, SpecialValuesAreBitExact) {
  CMatrix m(2, 2);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  m << Complex(nan, -0.0), Complex(inf, -inf), Complex(5e-324, 1e308), Complex(0.1, -0.3);
  const CMatrix back = io::decode_complex_matrix(io::encode_matrix(m));
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_TRUE(same_bits(m(i).real(), back(i).real()));
    EXPECT_TRUE(same_bits(m(i).imag(), back(i).imag()));
  }
}

TEST(MatrixCodec, FileSizeMatchesHeaderPlusPayload) {
  const fs::path dir = scratch("size");
  const CMatrix m = random_matrix(500, 256, 3);
  io::write_matrix(dir / "z.irsz", m);
  EXPECT_EQ(fs::file_size(dir / "z.irsz"), 24u + 500u * 256u * 16u);
  const CMatrix back = io::read_complex_matrix(dir / "z.irsz");
  EXPECT_EQ(back, m);
}

TEST(MatrixCodec, RowMajorLittleEndianLayout) {
  CMatrix m(1, 2);
  m << Complex(1.0, 2.0), Complex(3.0, 4.0);
  const auto bytes = io::encode_matrix(m);
  ASSERT_EQ(bytes.size(), 24u + 32u);
  EXPECT_EQ(std::memcmp(bytes.data(), "IRSZ", 4), 0);
  EXPECT_EQ(static_cast<int>(bytes[4]), 1);
  EXPECT_EQ(static_cast<int>(bytes[5]), 0);
  double v[4];
  std::memcpy(v, bytes.data() + 24, sizeof v);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], 2.0);
  EXPECT_EQ(v[2], 3.0);
  EXPECT_EQ(v[3], 4.0);
}

TEST(MatrixCodec, DistinctErrors) {
  const auto good = io::encode_matrix(random_matrix(3, 4, 1));

  auto magic = good;
  magic[0] = std::byte{'X'};
  EXPECT_THROW(io::decode_complex_matrix(magic), BadMagicError);

  auto shortened = good;
  shortened.pop_back();
  EXPECT_THROW(io::decode_complex_matrix(shortened), TruncatedPayloadError);
  EXPECT_THROW(io::decode_complex_matrix(std::span(good.data(), 10)), TruncatedPayloadError);

  auto version = good;
  version[4] = std::byte{9};
  EXPECT_THROW(io::decode_complex_matrix(version), VersionMismatchError);

  auto kind = good;
  kind[6] = std::byte{7};
  EXPECT_THROW(io::decode_complex_matrix(kind), IoError);
}

TEST(MatrixCodec, RealMatricesAndKindMismatch) {
  RMatrix r(2, 3);
  r << 1, 2, 3, 4, 5, -6.5;
  const auto bytes = io::encode_matrix(r);
  EXPECT_EQ(bytes.size(), 24u + 6u * 8u);
  EXPECT_EQ(io::decode_real_matrix(bytes), r);
  EXPECT_EQ(io::decode_header(bytes).kind, io::ElementKind::Float64);
  EXPECT_THROW(io::decode_complex_matrix(bytes), IoError);
  EXPECT_THROW(io::decode_real_matrix(io::encode_matrix(CMatrix(CMatrix::Zero(1, 1)))), IoError);
}

TEST(MatrixCodec, MissingFileIsIoError) {
  EXPECT_THROW(io::read_complex_matrix("/nonexistent/irslab/x.irsz"), IoError);
}

TEST(Scenario, RoundTrip) {
  io::ScenarioFile s;
  s.config = ScenarioConfig::desk_scale();
  s.config.rng_seed = 99;
  s.config.generator.nlos_loss_db = 17.5;
  s.ues = {{0, 10.5, -2.25, true}, {1, 20.0, 3.0, false}};
  const io::ScenarioFile back = io::parse_scenario(io::format_scenario(s));
  EXPECT_EQ(back.config.rng_seed, 99u);
  EXPECT_EQ(back.config.subcarriers, s.config.subcarriers);
  EXPECT_EQ(back.config.taps, s.config.taps);
  EXPECT_EQ(back.config.geometry.nh, s.config.geometry.nh);
  EXPECT_EQ(back.config.carrier_hz, s.config.carrier_hz);
  EXPECT_EQ(back.config.noise_psd_w_per_hz, s.config.noise_psd_w_per_hz);
  EXPECT_EQ(back.config.generator.nlos_loss_db, 17.5);
  ASSERT_EQ(back.ues.size(), 2u);
  EXPECT_EQ(back.ues[1].x_m, 20.0);
  EXPECT_FALSE(back.ues[1].los);
  EXPECT_EQ(io::format_scenario(back), io::format_scenario(s));
}

TEST(Scenario, MissingKeyIsConfigError) {
  io::ScenarioFile s;
  s.config = ScenarioConfig::desk_scale();
  std::string text = io::format_scenario(s);
  const auto pos = text.find("\"taps\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 6, "\"tapz\"");
  EXPECT_THROW(io::parse_scenario(text), ConfigError);
  EXPECT_THROW(io::parse_scenario("{not json"), ConfigError);
}

TEST(RateCsv, EmptyIsHeaderOnly) {
  EXPECT_EQ(io::export_rate_csv({}), "ue_id,los,rate_all_off,rate_best_pilot,rate_power_method\n");
}

TEST(RateCsv, OneRowHasFiveFields) {
  const std::string csv = io::export_rate_csv({{3, false, 1.5, 2.5, 3.5}});
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 4);
  EXPECT_EQ(row.substr(0, 4), "3,0,");
}

TEST(RateCsv, SortedAscendingInPowerRate) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1e8);
  std::vector<io::RateRow> rows;
  for (std::size_t i = 0; i < 200; ++i) rows.push_back({i, i % 3 != 0, u(rng), u(rng), u(rng)});
  std::istringstream in(io::export_rate_csv(rows));
  std::string line;
  std::getline(in, line);
  double prev = -1.0;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GE(v, prev);
    prev = v;
    ++count;
  }
  EXPECT_EQ(count, rows.size());
}

TEST(RateCsv, ValuesSurviveTextRoundTrip) {
  const double x = 0.1 + 0.2;
  const std::string csv = io::export_rate_csv({{0, true, x, x, x}});
  const std::string last = csv.substr(csv.rfind(',') + 1);
  EXPECT_EQ(std::stod(last), x);
}

TEST(Realization, RoundTrip) {
  const fs::path dir = scratch("realization");
  ChannelRealization ch;
  ch.hd = random_matrix(8, 1, 4).col(0);
  ch.v = random_matrix(16, 8, 5);
  ch.sampling_delay_s = 3.25e-7;
  ch.los = false;
  ch.paths.direct = {{1e-9, 2e-7, 0.0}};
  ch.paths.departing = {{2e-6, 1e-7, 0.3}, {4e-7, 1.5e-7, -0.2}};
  io::write_realization(dir / "ue", ch);
  const ChannelRealization back = io::read_realization(dir / "ue");
  EXPECT_EQ(back.hd, ch.hd);
  EXPECT_EQ(back.v, ch.v);
  EXPECT_EQ(back.sampling_delay_s, ch.sampling_delay_s);
  EXPECT_FALSE(back.los);
  ASSERT_EQ(back.paths.departing.size(), 2u);
  EXPECT_EQ(back.paths.departing[1].azimuth_rad, -0.2);
  EXPECT_TRUE(back.paths.incident.empty());
}
