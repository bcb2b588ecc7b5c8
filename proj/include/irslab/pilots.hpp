// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "irslab/channel.hpp"
#include "irslab/circuit.hpp"
#include "irslab/types.hpp"

namespace irslab {

enum class PilotLayout {
  Dataset1,  ///< [H, -H, H_flip, -H_flip], C = 4N
  Dataset2,  ///< H, C = N
  Custom,
};

std::string_view to_string(PilotLayout layout);
/// Accepts "dataset1", "dataset2", "custom". Throws ConfigError otherwise.
PilotLayout parse_pilot_layout(std::string_view name);

using SignMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Sylvester construction. Throws ConfigError unless n is a power of two.
SignMatrix hadamard(std::size_t n);

/// Intended element states for every pilot block. Column c of `signs` is the
/// configuration of block c; entries are +1 or -1 and map to element states
/// through state_from_sign. The intended reflection matrix is `signs` itself.
struct PilotBook {
  SignMatrix signs;
  PilotLayout layout = PilotLayout::Custom;
  /// Pairs (a, b), a < b, of columns with identical states.
  std::vector<std::pair<std::size_t, std::size_t>> repeated_pairs;

  static PilotBook custom(SignMatrix signs);

  std::size_t elements() const { return static_cast<std::size_t>(signs.rows()); }
  std::size_t columns() const { return static_cast<std::size_t>(signs.cols()); }
  StateVector states(std::size_t column) const;
  RMatrix intended_reflection() const { return signs.cast<double>(); }
};

/// Every pair of identical columns, each later duplicate paired with the
/// first occurrence of its pattern.
std::vector<std::pair<std::size_t, std::size_t>> find_repeated_columns(const SignMatrix& signs);

PilotBook build_pilot_book(PilotLayout layout, std::size_t n);

/// Received frequency-domain pilot blocks, one column per configuration.
struct PilotObservations {
  CMatrix z;  ///< K x C
  std::size_t ue_id = 0;
  std::uint64_t noise_seed = 0;
};

struct ReceptionOptions {
  bool coupling_enabled = true;
  bool noise_enabled = true;
  std::uint64_t noise_seed = 0;
  std::size_t ue_id = 0;
};

/// z_c = sqrt(P/B) F (h_d + V^T omega_c) + w_c with w_c ~ CN(0, N0 I). Noise
/// for column c is drawn from its own stream keyed by (noise_seed, c).
PilotObservations simulate_reception(const ChannelRealization& ch, const PilotBook& book,
                                     const ScenarioConfig& cfg, const CouplingKernel& kernel,
                                     const ReceptionOptions& options);

PilotObservations simulate_reception(const ChannelRealization& ch, const PilotBook& book,
                                     const ScenarioConfig& cfg, const ReceptionOptions& options);

}  // namespace irslab
