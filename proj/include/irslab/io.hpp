// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "irslab/channel.hpp"
#include "irslab/types.hpp"

namespace irslab::io {

// Matrix files: "IRSZ", u16 version, u16 element kind, u64 rows, u64 cols,
// then the entries in row-major order. Every field is little-endian; complex
// entries are (real, imag) pairs of IEEE-754 doubles.

inline constexpr std::uint16_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 24;

enum class ElementKind : std::uint16_t { Complex128 = 1, Float64 = 2 };

struct MatrixHeader {
  std::uint16_t version = kMatrixFormatVersion;
  ElementKind kind = ElementKind::Complex128;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;

  std::size_t element_bytes() const { return kind == ElementKind::Complex128 ? 16 : 8; }
};

std::vector<std::byte> encode_matrix(const CMatrix& m);
std::vector<std::byte> encode_matrix(const RMatrix& m);

/// Throws BadMagicError, VersionMismatchError or TruncatedPayloadError, and
/// IoError for an unknown element kind or a kind other than the requested one.
MatrixHeader decode_header(std::span<const std::byte> bytes);
CMatrix decode_complex_matrix(std::span<const std::byte> bytes);
RMatrix decode_real_matrix(std::span<const std::byte> bytes);

void write_matrix(const std::filesystem::path& path, const CMatrix& m);
void write_matrix(const std::filesystem::path& path, const RMatrix& m);
CMatrix read_complex_matrix(const std::filesystem::path& path);
RMatrix read_real_matrix(const std::filesystem::path& path);

struct UserEquipment {
  std::size_t id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  bool los = true;
};

struct ScenarioFile {
  ScenarioConfig config;
  std::vector<UserEquipment> ues;
};

/// JSON text with the keys carrier_hz, bandwidth_hz, subcarriers, taps,
/// power_w, noise_psd_w_per_hz, nh, nv, spacing_wavelengths, circuit{...},
/// rng_seed, ues[...] and an optional generator{...} block.
std::string format_scenario(const ScenarioFile& scenario);
/// Throws ConfigError on a missing key or invalid value.
ScenarioFile parse_scenario(const std::string& text);
void write_scenario(const std::filesystem::path& path, const ScenarioFile& scenario);
ScenarioFile read_scenario(const std::filesystem::path& path);

/// channel.json (delay, LOS flag, path parameters) plus hd.irsz and v.irsz.
void write_realization(const std::filesystem::path& dir, const ChannelRealization& ch);
ChannelRealization read_realization(const std::filesystem::path& dir);

struct RateRow {
  std::size_t ue_id = 0;
  bool los = true;
  double rate_all_off = 0.0;
  double rate_best_pilot = 0.0;
  double rate_power_method = 0.0;
};

/// Header plus one row per UE, ascending in rate_power_method.
std::string export_rate_csv(std::vector<RateRow> rows);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace irslab::io
