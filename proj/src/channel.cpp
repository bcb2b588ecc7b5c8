// SPDX-License-Identifier: Apache-2.0

#include "irslab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "irslab/errors.hpp"

namespace irslab {

ScenarioConfig ScenarioConfig::paper_scale() { return ScenarioConfig{}; }

ScenarioConfig ScenarioConfig::desk_scale() {
  ScenarioConfig cfg;
  cfg.subcarriers = 64;
  cfg.taps = 8;
  cfg.geometry = ArrayGeometry::for_carrier(8, 8, cfg.carrier_hz);
  return cfg;
}

void ScenarioConfig::validate() const {
  if (taps < 1) throw ConfigError("the FIR channel needs at least one tap");
  if (subcarriers <= taps) {
    throw ConfigError("subcarriers (" + std::to_string(subcarriers) + ") must exceed taps (" +
                      std::to_string(taps) + ")");
  }
  if (!(carrier_hz > 0.0) || !(bandwidth_hz > 0.0) || !(power_w > 0.0) ||
      !(noise_psd_w_per_hz > 0.0)) {
    throw ConfigError("carrier, bandwidth, power and noise PSD must be positive");
  }
  geometry.validate();
  circuit.validate();
}

double ScenarioConfig::pilot_amplitude() const { return std::sqrt(power_w / bandwidth_hz); }

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

RVector sinc_taps(double delay_s, double sampling_delay_s, double bandwidth_hz, std::size_t taps) {
  RVector out(static_cast<Eigen::Index>(taps));
  const double shift = bandwidth_hz * (sampling_delay_s - delay_s);
  for (std::size_t m = 0; m < taps; ++m) {
    out[static_cast<Eigen::Index>(m)] = sinc(static_cast<double>(m) + shift);
  }
  return out;
}

namespace {

Complex carrier_phase(double carrier_hz, double delay_s) {
  // Reduce the cycle count before forming the angle; f_c tau is ~1e3 cycles.
  const double cycles = carrier_hz * delay_s;
  const double frac = cycles - std::floor(cycles);
  return std::exp(-kJ * (2.0 * kPi * frac));
}

}  // namespace

DirectChannel build_direct_channel(std::span<const PathComponent> paths, const ScenarioConfig& cfg,
                                   std::optional<double> fallback_sampling_delay_s) {
  DirectChannel out;
  out.taps = CVector::Zero(static_cast<Eigen::Index>(cfg.taps));
  if (paths.empty()) {
    if (!fallback_sampling_delay_s) {
      throw std::invalid_argument("direct channel has no paths and no fallback sampling delay");
    }
    out.sampling_delay_s = *fallback_sampling_delay_s;
    return out;
  }
  out.sampling_delay_s =
      std::min_element(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
        return a.delay_s < b.delay_s;
      })->delay_s;
  for (const auto& p : paths) {
    const Complex coeff = std::sqrt(p.gain) * carrier_phase(cfg.carrier_hz, p.delay_s);
    out.taps += coeff * sinc_taps(p.delay_s, out.sampling_delay_s, cfg.bandwidth_hz, cfg.taps)
                            .cast<Complex>();
  }
  return out;
}

CMatrix build_cascaded_matrix(std::span<const PathComponent> incident,
                              std::span<const PathComponent> departing, double sampling_delay_s,
                              const ScenarioConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(cfg.geometry.size());
  CMatrix v = CMatrix::Zero(n, static_cast<Eigen::Index>(cfg.taps));
  std::vector<CVector> departing_response;
  departing_response.reserve(departing.size());
  for (const auto& b : departing) {
    departing_response.push_back(array_response_azimuth(b.azimuth_rad, cfg.geometry));
  }
  for (const auto& a : incident) {
    const CVector incident_response = array_response_azimuth(a.azimuth_rad, cfg.geometry);
    for (std::size_t l = 0; l < departing.size(); ++l) {
      const auto& b = departing[l];
      const double delay = a.delay_s + b.delay_s;
      const Complex coeff = std::sqrt(a.gain * b.gain) * carrier_phase(cfg.carrier_hz, delay);
      const RVector pulse = sinc_taps(delay, sampling_delay_s, cfg.bandwidth_hz, cfg.taps);
      v.noalias() += (coeff * incident_response.cwiseProduct(departing_response[l])) *
                     pulse.cast<Complex>().transpose();
    }
  }
  return v;
}

ChannelRealization realize_channel(PathSet paths, bool los, const ScenarioConfig& cfg) {
  std::optional<double> fallback;
  if (paths.direct.empty()) {
    double earliest = std::numeric_limits<double>::infinity();
    for (const auto& a : paths.incident) {
      for (const auto& b : paths.departing) earliest = std::min(earliest, a.delay_s + b.delay_s);
    }
    if (!std::isfinite(earliest)) {
      throw ConfigError("channel has neither direct nor cascaded paths");
    }
    fallback = earliest;
  }
  DirectChannel direct = build_direct_channel(paths.direct, cfg, fallback);

  ChannelRealization ch;
  ch.hd = std::move(direct.taps);
  ch.sampling_delay_s = direct.sampling_delay_s;
  ch.v = build_cascaded_matrix(paths.incident, paths.departing, ch.sampling_delay_s, cfg);
  ch.paths = std::move(paths);
  ch.los = los;
  return ch;
}

CMatrix dft_matrix(std::size_t subcarriers, std::size_t taps) {
  CMatrix f(static_cast<Eigen::Index>(subcarriers), static_cast<Eigen::Index>(taps));
  for (std::size_t k = 0; k < subcarriers; ++k) {
    for (std::size_t m = 0; m < taps; ++m) {
      const auto residue = static_cast<double>((k * m) % subcarriers);
      f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
          std::exp(-kJ * (2.0 * kPi * residue / static_cast<double>(subcarriers)));
    }
  }
  return f;
}

CVector composite_taps(const CVector& hd, const CMatrix& v, const CVector& omega) {
  if (v.rows() != omega.size() || v.cols() != hd.size()) {
    throw std::invalid_argument("channel dimensions do not match the reflection vector");
  }
  return hd + v.transpose() * omega;
}

CVector ofdm_response(const CVector& hd, const CMatrix& v, const CVector& omega,
                      std::size_t subcarriers) {
  return dft_matrix(subcarriers, static_cast<std::size_t>(hd.size())) *
         composite_taps(hd, v, omega);
}

double sum_rate(const CVector& frequency_response, const ScenarioConfig& cfg) {
  const double snr_scale = cfg.power_w / (cfg.bandwidth_hz * cfg.noise_psd_w_per_hz);
  double bits = 0.0;
  for (Eigen::Index k = 0; k < frequency_response.size(); ++k) {
    bits += std::log2(1.0 + snr_scale * std::norm(frequency_response[k]));
  }
  const auto symbols = static_cast<double>(cfg.subcarriers + cfg.taps - 1);
  return cfg.bandwidth_hz / symbols * bits;
}

AbsorbedChannel absorbed_channel(const ChannelRealization& ch, const ScenarioConfig& cfg) {
  const Complex on = reflection_coefficient(cfg.circuit.c_on_f, cfg.carrier_hz, cfg.circuit);
  const Complex off = reflection_coefficient(cfg.circuit.c_off_f, cfg.carrier_hz, cfg.circuit);
  const Complex plus = kPlusOneState == ElementState::On ? on : off;
  const Complex minus = kPlusOneState == ElementState::On ? off : on;

  AbsorbedChannel out;
  out.scale = 0.5 * (plus - minus);
  out.offset = 0.5 * (plus + minus);
  out.hd = ch.hd + out.offset * ch.v.colwise().sum().transpose();
  out.v = out.scale * ch.v;
  return out;
}

}  // namespace irslab
