// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "irslab/circuit.hpp"
#include "irslab/geometry.hpp"
#include "irslab/types.hpp"

namespace irslab {

/// Knobs of the synthetic path generator. Positions are metres in the
/// horizontal plane with the surface at the origin facing +x.
struct GeneratorParams {
  Eigen::Vector2d ap_position{40.0, -100.0};
  Eigen::Vector2d area_center{16.5, 1.0};
  Eigen::Vector2d area_size{13.0, 14.0};
  double mean_clusters = 5.0;
  double rms_delay_spread_s = 0.3e-6;
  double shadowing_los_db = 4.0;
  double shadowing_nlos_db = 8.0;
  /// Total scattered power of a LOS link relative to its geometric path.
  double los_cluster_power_db = -10.0;
  /// Extra attenuation of a blocked surface-to-UE link.
  double nlos_loss_db = 20.0;
  /// Penetration loss of the wall blocking the direct AP-to-UE link.
  double direct_wall_loss_db = 60.0;
  /// Largest scattered excess delay on any one link, as a fraction of the
  /// (M-1)/B window that the FIR taps cover.
  double max_excess_delay_fraction = 0.3;
};

/// All physical constants of one simulation.
struct ScenarioConfig {
  double carrier_hz = 4.0e9;
  double bandwidth_hz = 10.0e6;
  std::size_t subcarriers = 500;
  std::size_t taps = 20;
  double power_w = 1.0;
  /// Thermal floor -204 dBW/Hz plus a 9 dB noise figure.
  double noise_psd_w_per_hz = 3.1622776601683794e-20;
  ArrayGeometry geometry = ArrayGeometry::for_carrier(64, 64, 4.0e9);
  CircuitParams circuit;
  std::uint64_t rng_seed = 1;
  GeneratorParams generator;

  static ScenarioConfig paper_scale();
  /// 8x8 surface, K = 64, M = 8.
  static ScenarioConfig desk_scale();

  /// Throws ConfigError on K <= M, M < 1, non-positive B, P, N0 or bad
  /// geometry/circuit values.
  void validate() const;

  double sample_period_s() const { return 1.0 / bandwidth_hz; }
  /// Per-symbol pilot amplitude sqrt(P/B).
  double pilot_amplitude() const;
};

struct PathComponent {
  double gain = 0.0;  ///< linear power gain beta
  double delay_s = 0.0;
  double azimuth_rad = 0.0;  ///< only meaningful for surface paths
};

struct PathSet {
  std::vector<PathComponent> direct;   ///< AP -> UE
  std::vector<PathComponent> incident;  ///< AP -> surface
  std::vector<PathComponent> departing;  ///< surface -> UE
};

struct ChannelRealization {
  CVector hd;  ///< M taps of the uncontrollable channel
  CMatrix v;   ///< N x M cascaded channel
  double sampling_delay_s = 0.0;
  PathSet paths;
  bool los = true;
};

/// Normalized sinc, sin(pi x) / (pi x), with sinc(0) = 1.
double sinc(double x);

/// sinc(m + B (eta - delay)) for m = 0..taps-1.
RVector sinc_taps(double delay_s, double sampling_delay_s, double bandwidth_hz, std::size_t taps);

struct DirectChannel {
  CVector taps;
  double sampling_delay_s = 0.0;
};

/// Sum of sinc-shaped direct paths. The sampling delay is the earliest path
/// delay; an empty path list (full blockage) yields zero taps and requires
/// `fallback_sampling_delay_s`.
DirectChannel build_direct_channel(std::span<const PathComponent> paths,
                                   const ScenarioConfig& cfg,
                                   std::optional<double> fallback_sampling_delay_s = std::nullopt);

/// V = sum over path pairs of sqrt(beta_a beta_b) e^{-j 2 pi f_c tau}
/// (a(phi_a) .* a(phi_b)) sinc_taps(tau)^T, tau = tau_a + tau_b.
CMatrix build_cascaded_matrix(std::span<const PathComponent> incident,
                              std::span<const PathComponent> departing, double sampling_delay_s,
                              const ScenarioConfig& cfg);

/// Assembles h_d and V from path parameters. The sampling delay is the
/// earliest direct delay, or the earliest cascaded delay under full blockage.
ChannelRealization realize_channel(PathSet paths, bool los, const ScenarioConfig& cfg);

/// K x M matrix with entries e^{-j 2 pi k m / K}.
CMatrix dft_matrix(std::size_t subcarriers, std::size_t taps);

/// Time-domain taps h_d + V^T omega.
CVector composite_taps(const CVector& hd, const CMatrix& v, const CVector& omega);

/// F (h_d + V^T omega) over K subcarriers.
CVector ofdm_response(const CVector& hd, const CMatrix& v, const CVector& omega,
                      std::size_t subcarriers);

/// B/(K+M-1) sum_k log2(1 + P |h[k]|^2 / (B N0)) in bit/s.
double sum_rate(const CVector& frequency_response, const ScenarioConfig& cfg);

/// The channel seen through +/-1 pilot signs. With ideal per-element
/// reflection omega = offset * 1 + scale * s for s in {+1,-1}^N, so
/// h_d + V^T omega = (h_d + offset V^T 1) + (scale V)^T s.
struct AbsorbedChannel {
  CVector hd;
  CMatrix v;
  Complex scale;
  Complex offset;
};

AbsorbedChannel absorbed_channel(const ChannelRealization& ch, const ScenarioConfig& cfg);

/// Seeded synthetic path sets for a UE at `ue_position`. The AP-to-surface
/// link is line-of-sight, the direct link is blocked by a wall, and `los`
/// controls the surface-to-UE link. Throws ConfigError when a path would
/// fall outside the (M-1)/B window after the sampling instant.
ChannelRealization generate_scenario(const ScenarioConfig& cfg, const Eigen::Vector2d& ue_position,
                                     bool los, std::uint64_t ue_id = 0);

/// Geometric delay of the surface path, (|AP - IRS| + |IRS - UE|) / c.
double cascaded_geometric_delay(const ScenarioConfig& cfg, const Eigen::Vector2d& ue_position);

}  // namespace irslab
