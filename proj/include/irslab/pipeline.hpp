// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "irslab/channel.hpp"
#include "irslab/pilots.hpp"

namespace irslab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitRankError = 3,
  kExitIoError = 4,
};

/// Runs `body`, reporting any exception on stderr and mapping it to an exit code.
int run_guarded(const std::function<void()>& body);

struct ScaleOptions {
  bool paper = false;
  std::optional<std::size_t> nh, nv, subcarriers, taps;
};

/// Desk scale (8x8, K = 64, M = 8) or paper scale (64x64, K = 500, M = 20)
/// with per-field overrides.
ScenarioConfig scaled_config(const ScaleOptions& scale);

/// IRSLAB_SEED, when set, replaces `seed`. Throws ConfigError if it is not an integer.
std::uint64_t seed_from_environment(std::uint64_t seed);

/// FNV-1a 64-bit digest, rendered as 16 hex digits.
std::string digest(const std::string& text);

std::filesystem::path ue_dir(const std::filesystem::path& run_dir, std::size_t ue_id);

struct ScenarioGenOptions {
  std::filesystem::path run_dir;
  ScaleOptions scale;
  std::size_t ues = 10;
  double nlos_fraction = 14.0 / 51.0;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct PilotsOptions {
  std::filesystem::path run_dir;
  PilotLayout layout = PilotLayout::Dataset2;
  bool noise = true;
  bool coupling = true;
  std::optional<std::uint64_t> noise_seed;
  std::size_t jobs = 1;
};

enum class EstimateMode { Full, Reduced, Noise };

struct EstimateOptions {
  std::filesystem::path run_dir;
  EstimateMode mode = EstimateMode::Reduced;
  /// Defaults to dataset1 for full/noise and dataset2 for reduced.
  std::optional<PilotLayout> layout;
  std::size_t jobs = 1;
};

enum class ConfigureMethod { Power, BestPilot, AllOff };

struct ConfigureOptions {
  std::filesystem::path run_dir;
  ConfigureMethod method = ConfigureMethod::Power;
  PilotLayout layout = PilotLayout::Dataset2;
  std::size_t max_iters = 200;
  std::size_t random_starts = 0;
  std::size_t jobs = 1;
};

struct ReportOptions {
  std::filesystem::path run_dir;
};

struct ReportSummary {
  std::size_t ues = 0;
  double sum_all_off = 0.0;
  double sum_best_pilot = 0.0;
  double sum_power = 0.0;
  double ratio_power_all_off = 0.0;
  double ratio_best_pilot_all_off = 0.0;
  /// Share of UEs where the power method is at least as good as the best pilot.
  double power_beats_best_pilot = 0.0;
};

EstimateMode parse_estimate_mode(const std::string& name);
ConfigureMethod parse_configure_method(const std::string& name);
std::string to_string(ConfigureMethod method);

void cmd_scenario_gen(const ScenarioGenOptions& options);
void cmd_pilots(const PilotsOptions& options);
void cmd_estimate(const EstimateOptions& options);
void cmd_configure(const ConfigureOptions& options);
ReportSummary cmd_report(const ReportOptions& options);

}  // namespace irslab::cli
