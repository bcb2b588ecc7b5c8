// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <string_view>

#include "irslab/channel.hpp"
#include "irslab/geometry.hpp"
#include "irslab/pilots.hpp"
#include "irslab/types.hpp"

namespace irslab {

/// N0 estimate from pairs of blocks sent with identical configurations:
/// mean over pairs and subcarriers of |z_a - z_b|^2 / 2. Throws ConfigError
/// when the book has no repeated configurations.
double estimate_noise_psd(const PilotObservations& obs, const PilotBook& book);

/// Pseudo-inverse of the pseudo-DFT: F^dagger = F^H / K.
CMatrix dft_pseudo_inverse(std::size_t subcarriers, std::size_t taps);

/// [1 ... 1; signs] with one leading row of ones, (N+1) x C.
RMatrix extended_pilot_matrix(const PilotBook& book);

/// [1 ... 1; A^T signs] with A = 1_{N_V} kron I_{N_H}; rows of the pilot
/// signs are summed per surface column, (N_H+1) x C.
RMatrix reduced_extended_pilot_matrix(const PilotBook& book, const ArrayGeometry& g);

/// Right pseudo-inverse of a wide real pilot matrix P through its Gram system:
/// X P^dagger = (X P^T) (P P^T)^{-1}. Factorizes once; solve() is const and
/// may be shared across threads.
class PilotGramSolver {
 public:
  /// Gram condition number above which Cholesky gives way to a rank-revealing
  /// factorization.
  static constexpr double kCholeskyConditionLimit = 1e10;

  /// Throws RankError when P does not have full row rank.
  explicit PilotGramSolver(RMatrix pilots);
  ~PilotGramSolver();
  PilotGramSolver(PilotGramSolver&&) noexcept;
  PilotGramSolver& operator=(PilotGramSolver&&) noexcept;

  CMatrix solve(const CMatrix& x) const;
  const RMatrix& pilots() const { return pilots_; }
  double condition_number() const { return condition_; }
  bool used_cholesky() const;

 private:
  struct Factorization;
  RMatrix pilots_;
  std::unique_ptr<Factorization> factor_;
  double condition_ = 0.0;
};

struct EstimateFull {
  CVector hd;       ///< M
  CMatrix v;        ///< N x M
  double residual_norm = 0.0;
  double gram_condition = 0.0;
};

struct EstimateReduced {
  CVector hd;     ///< M
  CMatrix v_row;  ///< N_H x M
  double residual_norm = 0.0;
  double gram_condition = 0.0;

  /// A V_row, the full N x M cascaded matrix.
  CMatrix expand(const ArrayGeometry& g) const;
};

/// sqrt(B/P) F^dagger Z, the M x C time-domain blocks.
CMatrix time_domain_blocks(const PilotObservations& obs, const ScenarioConfig& cfg);

/// [h_d, V^T] = sqrt(B/P) F^dagger Z Omega_e^dagger. Throws RankError when the
/// extended pilot matrix is rank deficient (e.g. C = N).
EstimateFull ls_full(const PilotObservations& obs, const PilotBook& book,
                     const ScenarioConfig& cfg);
EstimateFull ls_full(const PilotObservations& obs, const PilotGramSolver& solver,
                     const ScenarioConfig& cfg);

/// Same estimator on the column-reduced unknowns [h_d, V_row^T].
EstimateReduced ls_reduced(const PilotObservations& obs, const PilotBook& book,
                           const ArrayGeometry& g, const ScenarioConfig& cfg);
EstimateReduced ls_reduced(const PilotObservations& obs, const PilotGramSolver& solver,
                           const ScenarioConfig& cfg);

enum class Grouping { ColumnConstant, None };

std::string_view to_string(Grouping grouping);

struct StructureReport {
  RMatrix deviation;  ///< N_H x M relative spread within each surface column
  double score = 0.0;  ///< fraction of energetic cells with deviation below threshold
  Grouping grouping = Grouping::None;
};

struct StructureThresholds {
  double deviation = 0.1;
  double score = 0.9;
  /// Cells with mean power below this fraction of the strongest cell are ignored.
  double relative_energy = 1e-2;
};

/// Measures how constant the estimated cascaded taps are along each vertical
/// surface column: std / |mean| over the N_V members of every (column, tap) cell.
StructureReport discover_structure(const EstimateFull& est, const ArrayGeometry& g,
                                   const StructureThresholds& thresholds = {});

}  // namespace irslab
