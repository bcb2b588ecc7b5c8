// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "irslab/channel.hpp"
#include "irslab/circuit.hpp"
#include "irslab/estimation.hpp"
#include "irslab/pilots.hpp"
#include "irslab/types.hpp"

namespace irslab {

using SignVector = Eigen::VectorXi;

/// Received-power objective c^H B c over c = [1; column signs].
struct QuadraticForm {
  CMatrix gram;  ///< (N_H+1) x (N_H+1), Hermitian PSD

  std::size_t size() const { return static_cast<std::size_t>(gram.rows()); }
  double objective(const SignVector& c) const;
};

/// B = G^H G with G = [h_d, N_V V_row^T].
QuadraticForm build_quadratic_form(const EstimateReduced& est, std::size_t nv);

enum class Termination { Converged, CycleDetected, IterationCap };

std::string_view to_string(Termination t);

struct PowerMethodResult {
  SignVector c;  ///< entries +/-1, c[0] = +1
  double objective = 0.0;
  std::size_t iterations = 0;
  Termination termination = Termination::IterationCap;
};

inline constexpr std::size_t kDefaultPowerIterations = 200;

/// Sign-projected power iteration: d = B c, c <- sign(Re(conj(d_0) d)) with
/// sign(0) = +1. Stops at a fixed point, when an earlier iterate recurs, or
/// after `max_iters` products; returns the best iterate visited, the later one
/// on ties.
PowerMethodResult binary_power_method(const QuadraticForm& q, const SignVector& init,
                                      std::size_t max_iters = kDefaultPowerIterations);

struct PowerMethodOptions {
  std::size_t max_iters = kDefaultPowerIterations;
  /// Extra random initializations besides the all-ones start.
  std::size_t random_starts = 0;
  std::uint64_t seed = 0;
};

/// All-ones start plus optional random restarts; the best objective wins and
/// ties go to the earliest start.
PowerMethodResult binary_power_method_multistart(const QuadraticForm& q,
                                                 const PowerMethodOptions& options);

/// Replicates c[1 + i] to every element of surface column i.
/// Throws std::invalid_argument unless c has N_H + 1 entries with c[0] = +1.
StateVector states_from_c(const SignVector& c, const ArrayGeometry& g);

struct ConfigurationResult {
  PowerMethodResult solution;
  StateVector states;
};

ConfigurationResult configure_power_method(const EstimateReduced& est, const ArrayGeometry& g,
                                           const PowerMethodOptions& options = {});

struct BestPilot {
  std::size_t column = 0;
  double rate = 0.0;  ///< estimated from the received block
};

/// Picks the pilot configuration whose per-block LS estimate sqrt(B/P) z_c
/// gives the highest rate.
BestPilot best_pilot_benchmark(const PilotObservations& obs, const PilotBook& book,
                               const ScenarioConfig& cfg);

StateVector all_off_benchmark(const ArrayGeometry& g);

/// True rate of `states` on the ground-truth channel.
double evaluate_configuration(const StateVector& states, const ChannelRealization& ch,
                              const ScenarioConfig& cfg, const CouplingKernel& kernel,
                              bool coupling_enabled = true);

}  // namespace irslab
