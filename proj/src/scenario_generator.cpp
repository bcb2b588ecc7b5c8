// SPDX-License-Identifier: Apache-2.0

// Synthetic multipath generator. Every link is a geometric path (when
// unobstructed) plus a Poisson number of scattered clusters with an
// exponential power-delay profile and lognormal link shadowing.

#include <cmath>
#include <random>
#include <string>

#include "irslab/channel.hpp"
#include "irslab/errors.hpp"

namespace irslab {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct LinkSpec {
  double distance_m;
  double azimuth_rad;
  double reference_gain;  // power gain of the unobstructed geometric path
  bool line_of_sight;
  double scattered_power_db;  // total cluster power relative to reference_gain
  double shadowing_db;
};

class ClusterSampler {
 public:
  ClusterSampler(const ScenarioConfig& cfg, std::mt19937_64& rng)
      : cfg_(cfg),
        rng_(rng),
        max_excess_s_(cfg.generator.max_excess_delay_fraction *
                      static_cast<double>(cfg.taps - 1) / cfg.bandwidth_hz) {}

  std::vector<PathComponent> sample(const LinkSpec& link) {
    const auto& gen = cfg_.generator;
    const double base_delay = link.distance_m / kSpeedOfLight;
    std::vector<PathComponent> paths;
    if (link.line_of_sight) {
      paths.push_back({link.reference_gain, base_delay, link.azimuth_rad});
    }

    std::poisson_distribution<int> count(gen.mean_clusters);
    std::exponential_distribution<double> excess(1.0 / gen.rms_delay_spread_s);
    std::uniform_real_distribution<double> azimuth(-kPi / 2, kPi / 2);
    std::normal_distribution<double> shadow(0.0, link.shadowing_db);

    const int clusters = count(rng_);
    const double total = link.reference_gain * db_to_linear(link.scattered_power_db) *
                         db_to_linear(shadow(rng_));
    std::vector<PathComponent> scattered;
    double weight_sum = 0.0;
    for (int c = 0; c < clusters; ++c) {
      double tau = excess(rng_);
      while (tau > max_excess_s_) tau = excess(rng_);
      const double w = std::exp(-tau / gen.rms_delay_spread_s);
      scattered.push_back({w, base_delay + tau, azimuth(rng_)});
      weight_sum += w;
    }
    for (auto& p : scattered) {
      p.gain *= total / weight_sum;
      paths.push_back(p);
    }
    return paths;
  }

 private:
  const ScenarioConfig& cfg_;
  std::mt19937_64& rng_;
  double max_excess_s_;
};

void check_window(const ChannelRealization& ch, const ScenarioConfig& cfg) {
  const double window = static_cast<double>(cfg.taps - 1) / cfg.bandwidth_hz;
  auto reject = [&](double delay) {
    throw ConfigError("path delay " + std::to_string(delay - ch.sampling_delay_s) +
                      " s after the sampling instant exceeds the " + std::to_string(window) +
                      " s tap window");
  };
  for (const auto& p : ch.paths.direct) {
    if (p.delay_s - ch.sampling_delay_s >= window) reject(p.delay_s);
  }
  for (const auto& a : ch.paths.incident) {
    for (const auto& b : ch.paths.departing) {
      if (a.delay_s + b.delay_s - ch.sampling_delay_s >= window) reject(a.delay_s + b.delay_s);
    }
  }
}

}  // namespace

double cascaded_geometric_delay(const ScenarioConfig& cfg, const Eigen::Vector2d& ue_position) {
  return (cfg.generator.ap_position.norm() + ue_position.norm()) / kSpeedOfLight;
}

ChannelRealization generate_scenario(const ScenarioConfig& cfg, const Eigen::Vector2d& ue_position,
                                     bool los, std::uint64_t ue_id) {
  cfg.validate();
  const auto& gen = cfg.generator;
  if (!(ue_position.x() > 0.0)) {
    throw ConfigError("UE must be in front of the surface (x > 0)");
  }

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed),
                    static_cast<std::uint32_t>(cfg.rng_seed >> 32),
                    static_cast<std::uint32_t>(ue_id), static_cast<std::uint32_t>(ue_id >> 32)};
  std::mt19937_64 rng(seq);
  ClusterSampler sampler(cfg, rng);

  const double lambda = cfg.geometry.wavelength_m;
  const double element_area = cfg.geometry.spacing_m() * cfg.geometry.spacing_m();
  auto aperture_gain = [&](double d) { return element_area / (4.0 * kPi * d * d); };
  auto free_space_gain = [&](double d) {
    const double r = lambda / (4.0 * kPi * d);
    return r * r;
  };

  const Eigen::Vector2d ap = gen.ap_position;
  const double d_direct = (ap - ue_position).norm();
  const double d_incident = ap.norm();
  const double d_departing = ue_position.norm();

  PathSet paths;
  paths.direct = sampler.sample({d_direct, 0.0,
                                 free_space_gain(d_direct) * db_to_linear(-gen.direct_wall_loss_db),
                                 false, 0.0, gen.shadowing_nlos_db});
  paths.incident = sampler.sample({d_incident, std::atan2(ap.y(), ap.x()),
                                   aperture_gain(d_incident), true, gen.los_cluster_power_db,
                                   gen.shadowing_los_db});
  paths.departing = sampler.sample(
      {d_departing, std::atan2(ue_position.y(), ue_position.x()), aperture_gain(d_departing), los,
       los ? gen.los_cluster_power_db : -gen.nlos_loss_db,
       los ? gen.shadowing_los_db : gen.shadowing_nlos_db});

  ChannelRealization ch = realize_channel(std::move(paths), los, cfg);
  check_window(ch, cfg);
  return ch;
}

}  // namespace irslab
