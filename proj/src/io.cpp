// SPDX-License-Identifier: Apache-2.0

#include "irslab/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "irslab/errors.hpp"

namespace irslab::io {

namespace {

constexpr char kMagic[4] = {'I', 'R', 'S', 'Z'};

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xff));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::byte>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t get_u16(std::span<const std::byte> in, std::size_t at) {
  return static_cast<std::uint16_t>(std::to_integer<unsigned>(in[at]) |
                                    (std::to_integer<unsigned>(in[at + 1]) << 8));
}

std::uint64_t get_u64(std::span<const std::byte> in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<unsigned>(in[at + i])) << (8 * i);
  }
  return v;
}

double get_f64(std::span<const std::byte> in, std::size_t at) {
  return std::bit_cast<double>(get_u64(in, at));
}

std::vector<std::byte> header_bytes(ElementKind kind, Eigen::Index rows, Eigen::Index cols) {
  std::vector<std::byte> out;
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_u16(out, kMatrixFormatVersion);
  put_u16(out, static_cast<std::uint16_t>(kind));
  put_u64(out, static_cast<std::uint64_t>(rows));
  put_u64(out, static_cast<std::uint64_t>(cols));
  return out;
}

std::span<const std::byte> checked_payload(std::span<const std::byte> bytes, ElementKind expected) {
  const MatrixHeader h = decode_header(bytes);
  if (h.kind != expected) {
    throw IoError(expected == ElementKind::Complex128 ? "matrix file holds real entries"
                                                      : "matrix file holds complex entries");
  }
  return bytes.subspan(kMatrixHeaderBytes);
}

std::vector<std::byte> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::byte>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

std::vector<std::byte> encode_matrix(const CMatrix& m) {
  auto out = header_bytes(ElementKind::Complex128, m.rows(), m.cols());
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 16);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f64(out, m(r, c).real());
      put_f64(out, m(r, c).imag());
    }
  }
  return out;
}

std::vector<std::byte> encode_matrix(const RMatrix& m) {
  auto out = header_bytes(ElementKind::Float64, m.rows(), m.cols());
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
  return out;
}

MatrixHeader decode_header(std::span<const std::byte> bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw BadMagicError("not an IRSZ matrix file");
  }
  if (bytes.size() < kMatrixHeaderBytes) throw TruncatedPayloadError("matrix header is truncated");
  MatrixHeader h;
  h.version = get_u16(bytes, 4);
  if (h.version != kMatrixFormatVersion) {
    throw VersionMismatchError("matrix format version " + std::to_string(h.version) +
                               ", expected " + std::to_string(kMatrixFormatVersion));
  }
  const std::uint16_t kind = get_u16(bytes, 6);
  if (kind != static_cast<std::uint16_t>(ElementKind::Complex128) &&
      kind != static_cast<std::uint16_t>(ElementKind::Float64)) {
    throw IoError("unknown matrix element kind " + std::to_string(kind));
  }
  h.kind = static_cast<ElementKind>(kind);
  h.rows = get_u64(bytes, 8);
  h.cols = get_u64(bytes, 16);
  const std::size_t available = bytes.size() - kMatrixHeaderBytes;
  if (h.cols != 0 && h.rows > available / h.element_bytes() / h.cols) {
    throw TruncatedPayloadError("matrix payload holds " + std::to_string(available) +
                                " bytes, header promises " + std::to_string(h.rows) + " x " +
                                std::to_string(h.cols));
  }
  if (available != h.rows * h.cols * h.element_bytes()) {
    throw IoError("matrix payload has trailing bytes");
  }
  return h;
}

CMatrix decode_complex_matrix(std::span<const std::byte> bytes) {
  const MatrixHeader h = decode_header(bytes);
  const auto payload = checked_payload(bytes, ElementKind::Complex128);
  CMatrix m(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c, at += 16) {
      m(r, c) = Complex{get_f64(payload, at), get_f64(payload, at + 8)};
    }
  }
  return m;
}

RMatrix decode_real_matrix(std::span<const std::byte> bytes) {
  const MatrixHeader h = decode_header(bytes);
  const auto payload = checked_payload(bytes, ElementKind::Float64);
  RMatrix m(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c, at += 8) m(r, c) = get_f64(payload, at);
  }
  return m;
}

void write_matrix(const std::filesystem::path& path, const CMatrix& m) {
  write_bytes(path, encode_matrix(m));
}

void write_matrix(const std::filesystem::path& path, const RMatrix& m) {
  write_bytes(path, encode_matrix(m));
}

CMatrix read_complex_matrix(const std::filesystem::path& path) {
  return decode_complex_matrix(read_bytes(path));
}

RMatrix read_real_matrix(const std::filesystem::path& path) {
  return decode_real_matrix(read_bytes(path));
}

// ---------------------------------------------------------------------------
// Scenario and realization documents

namespace {

using nlohmann::json;

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("scenario is missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario key '") + key + "': " + e.what());
  }
}

template <typename T>
void optional_into(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json vec2(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

Eigen::Vector2d vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

json paths_json(const std::vector<PathComponent>& paths) {
  json out = json::array();
  for (const auto& p : paths) {
    out.push_back({{"gain", p.gain}, {"delay_s", p.delay_s}, {"azimuth_rad", p.azimuth_rad}});
  }
  return out;
}

std::vector<PathComponent> paths_from(const json& j) {
  std::vector<PathComponent> out;
  for (const auto& p : j) {
    out.push_back({p.at("gain").get<double>(), p.at("delay_s").get<double>(),
                   p.at("azimuth_rad").get<double>()});
  }
  return out;
}

}  // namespace

std::string format_scenario(const ScenarioFile& scenario) {
  const auto& c = scenario.config;
  const auto& g = c.generator;
  json j;
  j["carrier_hz"] = c.carrier_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["subcarriers"] = c.subcarriers;
  j["taps"] = c.taps;
  j["power_w"] = c.power_w;
  j["noise_psd_w_per_hz"] = c.noise_psd_w_per_hz;
  j["nh"] = c.geometry.nh;
  j["nv"] = c.geometry.nv;
  j["spacing_wavelengths"] = c.geometry.spacing_wavelengths;
  j["circuit"] = {{"l1_h", c.circuit.l1_h},     {"l2_h", c.circuit.l2_h},
                  {"r_ohm", c.circuit.r_ohm},   {"z0_ohm", c.circuit.z0_ohm},
                  {"c_off_f", c.circuit.c_off_f}, {"c_on_f", c.circuit.c_on_f}};
  j["rng_seed"] = c.rng_seed;
  j["generator"] = {{"ap_position_m", vec2(g.ap_position)},
                    {"area_center_m", vec2(g.area_center)},
                    {"area_size_m", vec2(g.area_size)},
                    {"mean_clusters", g.mean_clusters},
                    {"rms_delay_spread_s", g.rms_delay_spread_s},
                    {"shadowing_los_db", g.shadowing_los_db},
                    {"shadowing_nlos_db", g.shadowing_nlos_db},
                    {"los_cluster_power_db", g.los_cluster_power_db},
                    {"nlos_loss_db", g.nlos_loss_db},
                    {"direct_wall_loss_db", g.direct_wall_loss_db},
                    {"max_excess_delay_fraction", g.max_excess_delay_fraction}};
  json ues = json::array();
  for (const auto& ue : scenario.ues) {
    ues.push_back({{"id", ue.id}, {"x_m", ue.x_m}, {"y_m", ue.y_m}, {"los", ue.los}});
  }
  j["ues"] = std::move(ues);
  return j.dump(2) + "\n";
}

ScenarioFile parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  ScenarioFile s;
  auto& c = s.config;
  c.carrier_hz = required<double>(j, "carrier_hz");
  c.bandwidth_hz = required<double>(j, "bandwidth_hz");
  c.subcarriers = required<std::size_t>(j, "subcarriers");
  c.taps = required<std::size_t>(j, "taps");
  c.power_w = required<double>(j, "power_w");
  c.noise_psd_w_per_hz = required<double>(j, "noise_psd_w_per_hz");
  c.geometry.nh = required<std::size_t>(j, "nh");
  c.geometry.nv = required<std::size_t>(j, "nv");
  c.geometry.spacing_wavelengths = required<double>(j, "spacing_wavelengths");
  c.geometry.wavelength_m = kSpeedOfLight / c.carrier_hz;
  const json circuit = required<json>(j, "circuit");
  c.circuit.l1_h = required<double>(circuit, "l1_h");
  c.circuit.l2_h = required<double>(circuit, "l2_h");
  c.circuit.r_ohm = required<double>(circuit, "r_ohm");
  c.circuit.z0_ohm = required<double>(circuit, "z0_ohm");
  c.circuit.c_off_f = required<double>(circuit, "c_off_f");
  c.circuit.c_on_f = required<double>(circuit, "c_on_f");
  c.rng_seed = required<std::uint64_t>(j, "rng_seed");

  if (j.contains("generator")) {
    const json& g = j["generator"];
    auto& gen = c.generator;
    if (g.contains("ap_position_m")) gen.ap_position = vec2(g["ap_position_m"]);
    if (g.contains("area_center_m")) gen.area_center = vec2(g["area_center_m"]);
    if (g.contains("area_size_m")) gen.area_size = vec2(g["area_size_m"]);
    optional_into(g, "mean_clusters", gen.mean_clusters);
    optional_into(g, "rms_delay_spread_s", gen.rms_delay_spread_s);
    optional_into(g, "shadowing_los_db", gen.shadowing_los_db);
    optional_into(g, "shadowing_nlos_db", gen.shadowing_nlos_db);
    optional_into(g, "los_cluster_power_db", gen.los_cluster_power_db);
    optional_into(g, "nlos_loss_db", gen.nlos_loss_db);
    optional_into(g, "direct_wall_loss_db", gen.direct_wall_loss_db);
    optional_into(g, "max_excess_delay_fraction", gen.max_excess_delay_fraction);
  }

  for (const auto& ue : required<json>(j, "ues")) {
    s.ues.push_back({required<std::size_t>(ue, "id"), required<double>(ue, "x_m"),
                     required<double>(ue, "y_m"), required<bool>(ue, "los")});
  }
  c.validate();
  return s;
}

void write_scenario(const std::filesystem::path& path, const ScenarioFile& scenario) {
  write_text(path, format_scenario(scenario));
}

ScenarioFile read_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path));
}

void write_realization(const std::filesystem::path& dir, const ChannelRealization& ch) {
  std::filesystem::create_directories(dir);
  json j;
  j["sampling_delay_s"] = ch.sampling_delay_s;
  j["los"] = ch.los;
  j["paths"] = {{"direct", paths_json(ch.paths.direct)},
                {"incident", paths_json(ch.paths.incident)},
                {"departing", paths_json(ch.paths.departing)}};
  write_text(dir / "channel.json", j.dump(2) + "\n");
  write_matrix(dir / "hd.irsz", CMatrix(ch.hd));
  write_matrix(dir / "v.irsz", ch.v);
}

ChannelRealization read_realization(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(read_text(dir / "channel.json"));
  } catch (const json::exception& e) {
    throw IoError("bad channel.json in " + dir.string() + ": " + e.what());
  }
  ChannelRealization ch;
  ch.sampling_delay_s = j.at("sampling_delay_s").get<double>();
  ch.los = j.at("los").get<bool>();
  ch.paths.direct = paths_from(j.at("paths").at("direct"));
  ch.paths.incident = paths_from(j.at("paths").at("incident"));
  ch.paths.departing = paths_from(j.at("paths").at("departing"));
  const CMatrix hd = read_complex_matrix(dir / "hd.irsz");
  if (hd.cols() != 1) throw IoError("hd.irsz must be a column vector");
  ch.hd = hd.col(0);
  ch.v = read_complex_matrix(dir / "v.irsz");
  return ch;
}

std::string export_rate_csv(std::vector<RateRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) {
    return a.rate_power_method < b.rate_power_method;
  });
  std::string out = "ue_id,los,rate_all_off,rate_best_pilot,rate_power_method\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%d,%.17g,%.17g,%.17g\n", r.ue_id, r.los ? 1 : 0,
                  r.rate_all_off, r.rate_best_pilot, r.rate_power_method);
    out += line;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace irslab::io
