// SPDX-License-Identifier: Apache-2.0

#include "irslab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "irslab/errors.hpp"

namespace irslab {

double estimate_noise_psd(const PilotObservations& obs, const PilotBook& book) {
  if (book.repeated_pairs.empty()) {
    throw ConfigError(
        "noise estimation needs repeated pilot configurations; use a dataset1-style book");
  }
  if (static_cast<std::size_t>(obs.z.cols()) != book.columns()) {
    throw std::invalid_argument("observations and pilot book disagree on the block count");
  }
  double total = 0.0;
  for (const auto& [a, b] : book.repeated_pairs) {
    total += (obs.z.col(static_cast<Eigen::Index>(a)) - obs.z.col(static_cast<Eigen::Index>(b)))
                 .squaredNorm();
  }
  const auto samples = static_cast<double>(book.repeated_pairs.size()) *
                       static_cast<double>(obs.z.rows());
  return total / (2.0 * samples);
}

CMatrix dft_pseudo_inverse(std::size_t subcarriers, std::size_t taps) {
  return dft_matrix(subcarriers, taps).adjoint() / static_cast<double>(subcarriers);
}

RMatrix extended_pilot_matrix(const PilotBook& book) {
  RMatrix p(static_cast<Eigen::Index>(book.elements() + 1),
            static_cast<Eigen::Index>(book.columns()));
  p.row(0).setOnes();
  p.bottomRows(static_cast<Eigen::Index>(book.elements())) = book.intended_reflection();
  return p;
}

RMatrix reduced_extended_pilot_matrix(const PilotBook& book, const ArrayGeometry& g) {
  if (book.elements() != g.size()) {
    throw std::invalid_argument("pilot book does not match the array size");
  }
  RMatrix p = RMatrix::Zero(static_cast<Eigen::Index>(g.nh + 1),
                            static_cast<Eigen::Index>(book.columns()));
  p.row(0).setOnes();
  for (std::size_t n = 0; n < book.elements(); ++n) {
    p.row(static_cast<Eigen::Index>(g.horizontal_index(n) + 1)) +=
        book.signs.row(static_cast<Eigen::Index>(n)).cast<double>();
  }
  return p;
}

struct PilotGramSolver::Factorization {
  std::optional<Eigen::LLT<RMatrix>> cholesky;
  std::optional<Eigen::ColPivHouseholderQR<RMatrix>> qr;

  RMatrix solve(const RMatrix& rhs) const {
    return cholesky ? RMatrix(cholesky->solve(rhs)) : RMatrix(qr->solve(rhs));
  }
};

PilotGramSolver::PilotGramSolver(RMatrix pilots)
    : pilots_(std::move(pilots)), factor_(std::make_unique<Factorization>()) {
  const auto rows = pilots_.rows();
  if (pilots_.cols() < rows) {
    throw RankError("pilot matrix has " + std::to_string(rows) + " rows but only " +
                    std::to_string(pilots_.cols()) +
                    " blocks; full row rank needs at least as many blocks as unknowns");
  }
  const RMatrix gram = pilots_ * pilots_.transpose();

  Eigen::LLT<RMatrix> llt(gram);
  if (llt.info() == Eigen::Success) {
    const double rcond = llt.rcond();
    condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (condition_ <= kCholeskyConditionLimit) {
      factor_->cholesky.emplace(std::move(llt));
      return;
    }
  }

  Eigen::ColPivHouseholderQR<RMatrix> qr(gram);
  qr.setThreshold(1e-12);
  if (qr.rank() < rows) {
    throw RankError("extended pilot matrix has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(rows) + "; the least-squares estimate is not unique");
  }
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  condition_ = diag.maxCoeff() / diag.minCoeff();
  factor_->qr.emplace(std::move(qr));
}

PilotGramSolver::~PilotGramSolver() = default;
PilotGramSolver::PilotGramSolver(PilotGramSolver&&) noexcept = default;
PilotGramSolver& PilotGramSolver::operator=(PilotGramSolver&&) noexcept = default;

bool PilotGramSolver::used_cholesky() const { return factor_->cholesky.has_value(); }

CMatrix PilotGramSolver::solve(const CMatrix& x) const {
  if (x.cols() != pilots_.cols()) {
    throw std::invalid_argument("block count does not match the pilot matrix");
  }
  // Gram is real and symmetric: (X P^T) G^{-1} = (G^{-1} (X P^T)^T)^T.
  const CMatrix projected = x * pilots_.transpose();
  const RMatrix re = factor_->solve(projected.real().transpose());
  const RMatrix im = factor_->solve(projected.imag().transpose());
  CMatrix out(projected.rows(), projected.cols());
  out.real() = re.transpose();
  out.imag() = im.transpose();
  return out;
}

CMatrix EstimateReduced::expand(const ArrayGeometry& g) const {
  CMatrix v(static_cast<Eigen::Index>(g.size()), v_row.cols());
  for (std::size_t n = 0; n < g.size(); ++n) {
    v.row(static_cast<Eigen::Index>(n)) = v_row.row(static_cast<Eigen::Index>(g.horizontal_index(n)));
  }
  return v;
}

CMatrix time_domain_blocks(const PilotObservations& obs, const ScenarioConfig& cfg) {
  if (static_cast<std::size_t>(obs.z.rows()) != cfg.subcarriers) {
    throw std::invalid_argument("observations have " + std::to_string(obs.z.rows()) +
                                " subcarriers, scenario has " + std::to_string(cfg.subcarriers));
  }
  return (1.0 / cfg.pilot_amplitude()) * (dft_pseudo_inverse(cfg.subcarriers, cfg.taps) * obs.z);
}

namespace {

struct Solved {
  CMatrix coefficients;  // M x rows(P)
  double residual_norm;
};

Solved solve_blocks(const PilotObservations& obs, const PilotGramSolver& solver,
                    const ScenarioConfig& cfg) {
  const CMatrix blocks = time_domain_blocks(obs, cfg);
  Solved out;
  out.coefficients = solver.solve(blocks);
  const CMatrix model = cfg.pilot_amplitude() * (dft_matrix(cfg.subcarriers, cfg.taps) *
                                                 (out.coefficients * solver.pilots()));
  out.residual_norm = (obs.z - model).norm();
  return out;
}

}  // namespace

EstimateFull ls_full(const PilotObservations& obs, const PilotGramSolver& solver,
                     const ScenarioConfig& cfg) {
  Solved s = solve_blocks(obs, solver, cfg);
  const auto n = s.coefficients.cols() - 1;
  EstimateFull est;
  est.hd = s.coefficients.col(0);
  est.v = s.coefficients.rightCols(n).transpose();
  est.residual_norm = s.residual_norm;
  est.gram_condition = solver.condition_number();
  return est;
}

EstimateFull ls_full(const PilotObservations& obs, const PilotBook& book,
                     const ScenarioConfig& cfg) {
  if (book.columns() < book.elements() + 1) {
    throw RankError("extended pilot matrix is " + std::to_string(book.elements() + 1) + " x " +
                    std::to_string(book.columns()) +
                    " and cannot have full row rank; use the reduced estimator");
  }
  return ls_full(obs, PilotGramSolver(extended_pilot_matrix(book)), cfg);
}

EstimateReduced ls_reduced(const PilotObservations& obs, const PilotGramSolver& solver,
                           const ScenarioConfig& cfg) {
  Solved s = solve_blocks(obs, solver, cfg);
  const auto nh = s.coefficients.cols() - 1;
  EstimateReduced est;
  est.hd = s.coefficients.col(0);
  est.v_row = s.coefficients.rightCols(nh).transpose();
  est.residual_norm = s.residual_norm;
  est.gram_condition = solver.condition_number();
  return est;
}

EstimateReduced ls_reduced(const PilotObservations& obs, const PilotBook& book,
                           const ArrayGeometry& g, const ScenarioConfig& cfg) {
  return ls_reduced(obs, PilotGramSolver(reduced_extended_pilot_matrix(book, g)), cfg);
}

std::string_view to_string(Grouping grouping) {
  return grouping == Grouping::ColumnConstant ? "column-constant" : "none";
}

StructureReport discover_structure(const EstimateFull& est, const ArrayGeometry& g,
                                   const StructureThresholds& thresholds) {
  if (static_cast<std::size_t>(est.v.rows()) != g.size()) {
    throw std::invalid_argument("estimate does not match the array size");
  }
  const auto nh = static_cast<Eigen::Index>(g.nh);
  const auto taps = est.v.cols();
  const auto nv = static_cast<double>(g.nv);

  CMatrix mean = CMatrix::Zero(nh, taps);
  RMatrix power = RMatrix::Zero(nh, taps);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto h = static_cast<Eigen::Index>(g.horizontal_index(n));
    mean.row(h) += est.v.row(static_cast<Eigen::Index>(n));
    power.row(h) += est.v.row(static_cast<Eigen::Index>(n)).cwiseAbs2();
  }
  mean /= nv;
  power /= nv;

  StructureReport report;
  report.deviation.resize(nh, taps);
  const double strongest = power.maxCoeff();
  std::size_t energetic = 0;
  std::size_t constant = 0;
  for (Eigen::Index h = 0; h < nh; ++h) {
    for (Eigen::Index m = 0; m < taps; ++m) {
      // Population variance around the cell mean.
      const double variance = std::max(0.0, power(h, m) - std::norm(mean(h, m)));
      const double spread = std::sqrt(variance);
      const double magnitude = std::abs(mean(h, m));
      double deviation = 0.0;
      if (magnitude > 0.0) {
        deviation = spread / magnitude;
      } else if (spread > 0.0) {
        deviation = 1.0;
      }
      report.deviation(h, m) = deviation;
      if (strongest > 0.0 && power(h, m) >= thresholds.relative_energy * strongest) {
        ++energetic;
        if (deviation < thresholds.deviation) ++constant;
      }
    }
  }
  report.score =
      energetic == 0 ? 0.0 : static_cast<double>(constant) / static_cast<double>(energetic);
  report.grouping = report.score > thresholds.score ? Grouping::ColumnConstant : Grouping::None;
  return report;
}

}  // namespace irslab
