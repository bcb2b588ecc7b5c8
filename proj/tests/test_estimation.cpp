// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "irslab/errors.hpp"
#include "irslab/estimation.hpp"

using namespace irslab;

namespace {

ScenarioConfig config_for(std::size_t nh, std::size_t nv, std::size_t k = 64, std::size_t m = 8) {
  ScenarioConfig cfg = ScenarioConfig::desk_scale();
  cfg.geometry = ArrayGeometry::for_carrier(nh, nv, cfg.carrier_hz);
  cfg.subcarriers = k;
  cfg.taps = m;
  return cfg;
}

// Column-structured random channel: V = A V_row.
ChannelRealization structured_channel(std::mt19937_64& rng, const ScenarioConfig& cfg) {
  std::normal_distribution<double> g(0.0, 1e-6);
  const auto nh = static_cast<Eigen::Index>(cfg.geometry.nh);
  const auto m = static_cast<Eigen::Index>(cfg.taps);
  ChannelRealization ch;
  ch.hd.resize(m);
  for (auto& x : ch.hd) x = Complex(g(rng), g(rng));
  CMatrix row(nh, m);
  for (Eigen::Index i = 0; i < nh; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) row(i, j) = Complex(g(rng), g(rng));
  }
  ch.v.resize(static_cast<Eigen::Index>(cfg.geometry.size()), m);
  for (std::size_t n = 0; n < cfg.geometry.size(); ++n) {
    ch.v.row(static_cast<Eigen::Index>(n)) =
        row.row(static_cast<Eigen::Index>(cfg.geometry.horizontal_index(n)));
  }
  return ch;
}

ChannelRealization generic_channel(std::mt19937_64& rng, const ScenarioConfig& cfg) {
  ChannelRealization ch = structured_channel(rng, cfg);
  std::normal_distribution<double> g(0.0, 1e-6);
  for (Eigen::Index i = 0; i < ch.v.rows(); ++i) {
    for (Eigen::Index j = 0; j < ch.v.cols(); ++j) ch.v(i, j) = Complex(g(rng), g(rng));
  }
  return ch;
}

ReceptionOptions options(bool noise, bool coupling, std::uint64_t seed = 0) {
  ReceptionOptions rx;
  rx.noise_enabled = noise;
  rx.coupling_enabled = coupling;
  rx.noise_seed = seed;
  return rx;
}

double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(NoisePsd, ZeroWithoutNoise) {
  std::mt19937_64 rng(1);
  const ScenarioConfig cfg = config_for(4, 4);
  const auto ch = generic_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 16);
  const auto obs = simulate_reception(ch, book, cfg, options(false, true));
  EXPECT_EQ(estimate_noise_psd(obs, book), 0.0);
}

TEST(NoisePsd, WithinFivePercentAtDeskScale) {
  std::mt19937_64 rng(2);
  const ScenarioConfig cfg = config_for(8, 8);
  ASSERT_DOUBLE_EQ(cfg.noise_psd_w_per_hz, std::pow(10.0, -19.5));
  const auto ch = generic_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 64);
  const auto obs = simulate_reception(ch, book, cfg, options(true, true, 11));
  const double n0 = estimate_noise_psd(obs, book);
  EXPECT_NEAR(n0 / cfg.noise_psd_w_per_hz, 1.0, 0.05);
}

TEST(NoisePsd, ScalesLinearlyWithTruth) {
  std::mt19937_64 rng(3);
  ScenarioConfig cfg = config_for(4, 4);
  const auto ch = generic_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 16);
  double base = 0.0, doubled = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    base += estimate_noise_psd(simulate_reception(ch, book, cfg, options(true, true, seed)), book);
  }
  cfg.noise_psd_w_per_hz *= 2.0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    doubled += estimate_noise_psd(simulate_reception(ch, book, cfg, options(true, true, seed)), book);
  }
  EXPECT_NEAR(doubled / base, 2.0, 0.1);
}

TEST(NoisePsd, NeedsRepeatedConfigurations) {
  const ScenarioConfig cfg = config_for(2, 2, 16, 4);
  std::mt19937_64 rng(4);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset2, 4);
  const auto obs = simulate_reception(generic_channel(rng, cfg), book, cfg, options(true, true));
  EXPECT_THROW(estimate_noise_psd(obs, book), ConfigError);
}

TEST(Dft, PseudoInverseIsLeftInverse) {
  for (auto [k, m] : {std::pair{64, 8}, std::pair{500, 20}, std::pair{9, 8}}) {
    const CMatrix f = dft_matrix(k, m);
    const CMatrix fi = dft_pseudo_inverse(k, m);
    EXPECT_LT((fi * f - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GramSolver, HadamardGramIsDiagonal) {
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 16);
  const RMatrix p = extended_pilot_matrix(book);
  ASSERT_EQ(p.rows(), 17);
  EXPECT_EQ(p * p.transpose(), 64.0 * RMatrix::Identity(17, 17));
  const PilotGramSolver solver(p);
  EXPECT_TRUE(solver.used_cholesky());
  EXPECT_NEAR(solver.condition_number(), 1.0, 1e-12);
}

TEST(GramSolver, IllConditionedFallsBackToQr) {
  RMatrix p(2, 3);
  p << 1.0, 1.0, 1.0,  //
      1.0, 1.0 + 1e-5, 1.0;
  const PilotGramSolver solver(p);
  EXPECT_FALSE(solver.used_cholesky());
  CMatrix x(1, 3);
  x << 4.0, 4.0 + 3e-5, 4.0;  // [1, 3] * p
  const CMatrix y = solver.solve(x);
  // Gram condition ~1e11, so ~1e-5 of the digits are gone.
  EXPECT_NEAR(y(0, 0).real(), 1.0, 1e-4);
  EXPECT_NEAR(y(0, 1).real(), 3.0, 1e-4);
}

TEST(GramSolver, RankDeficientThrows) {
  RMatrix p(2, 4);
  p << 1, 1, 1, 1,  //
      2, 2, 2, 2;
  EXPECT_THROW(PilotGramSolver{p}, RankError);
  EXPECT_THROW(PilotGramSolver{RMatrix::Ones(3, 2)}, RankError);
}

TEST(LsFull, ExactRecoveryOnDataset1) {
  std::mt19937_64 rng(5);
  const ScenarioConfig cfg = config_for(8, 8);
  const auto ch = generic_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 64);
  const auto est = ls_full(simulate_reception(ch, book, cfg, options(false, false)), book, cfg);
  const AbsorbedChannel truth = absorbed_channel(ch, cfg);
  EXPECT_LT(rel(est.hd, truth.hd), 1e-8);
  EXPECT_LT(rel(est.v, truth.v), 1e-8);
  EXPECT_LT(est.residual_norm, 1e-8 * truth.v.norm());
}

TEST(LsFull, CouplingResidualIsHardwareMismatchTerm) {
  std::mt19937_64 rng(6);
  const ScenarioConfig cfg = config_for(4, 4, 32, 4);
  const auto ch = generic_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 16);
  const auto est = ls_full(simulate_reception(ch, book, cfg, options(false, true)), book, cfg);

  // Raw [h_d, V^T] with intended reflections +/-1 and actual reflections omega_c.
  const auto kernel = CouplingKernel::build(cfg.geometry);
  const auto c = static_cast<Eigen::Index>(book.columns());
  CMatrix e(17, c);
  e.row(0).setZero();
  for (Eigen::Index col = 0; col < c; ++col) {
    const CVector omega = reflection_vector(book.states(static_cast<std::size_t>(col)), kernel,
                                            cfg.circuit, cfg.carrier_hz, true);
    e.col(col).tail(16) = omega - book.signs.col(col).cast<double>().cast<Complex>();
  }
  CMatrix hv(4, 17);
  hv.col(0) = ch.hd;
  hv.rightCols(16) = ch.v.transpose();
  const RMatrix ext = extended_pilot_matrix(book);
  const RMatrix pinv = ext.completeOrthogonalDecomposition().pseudoInverse();
  const CMatrix mismatch = hv * e * pinv.cast<Complex>();

  CMatrix got(4, 17);
  got.col(0) = est.hd;
  got.rightCols(16) = est.v.transpose();
  EXPECT_LT(rel(got - hv, mismatch), 1e-8);
}

TEST(LsFull, Dataset2IsRankDeficient) {
  std::mt19937_64 rng(7);
  const ScenarioConfig cfg = config_for(4, 4, 32, 4);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset2, 16);
  const auto obs = simulate_reception(generic_channel(rng, cfg), book, cfg, options(true, true));
  EXPECT_THROW(ls_full(obs, book, cfg), RankError);
  EXPECT_THROW(PilotGramSolver{extended_pilot_matrix(book)}, RankError);
}

TEST(LsFull, LinearInObservations) {
  std::mt19937_64 rng(8);
  const ScenarioConfig cfg = config_for(4, 2, 32, 4);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 8);
  const PilotGramSolver solver(extended_pilot_matrix(book));
  auto obs1 = simulate_reception(generic_channel(rng, cfg), book, cfg, options(true, true, 1));
  auto obs2 = simulate_reception(generic_channel(rng, cfg), book, cfg, options(true, true, 2));
  PilotObservations sum = obs1;
  sum.z += obs2.z;
  const auto a = ls_full(obs1, solver, cfg), b = ls_full(obs2, solver, cfg);
  const auto s = ls_full(sum, solver, cfg);
  EXPECT_LT((s.v - a.v - b.v).norm(), 1e-12 * s.v.norm());
  EXPECT_LT((s.hd - a.hd - b.hd).norm(), 1e-12 * s.hd.norm());
}

TEST(LsFull, UnbiasedUnderNoise) {
  std::mt19937_64 rng(9);
  const ScenarioConfig cfg = config_for(8, 8);
  const auto ch = generic_channel(rng, cfg);
  const AbsorbedChannel truth = absorbed_channel(ch, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 64);
  const PilotGramSolver solver(extended_pilot_matrix(book));
  Complex mean = 0.0;
  double power = 0.0;
  double count = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto est = ls_full(simulate_reception(ch, book, cfg, options(true, false, seed)), solver, cfg);
    const CMatrix err = est.v - truth.v;
    mean += err.sum();
    power += err.squaredNorm();
    count += static_cast<double>(err.size());
  }
  mean /= count;
  const double stddev = std::sqrt(power / count - std::norm(mean));
  EXPECT_LT(std::abs(mean) / stddev, 0.05);
}

TEST(Structure, ColumnConstantEstimateScoresOne) {
  std::mt19937_64 rng(10);
  const ScenarioConfig cfg = config_for(4, 4, 32, 4);
  EstimateFull est;
  est.v = structured_channel(rng, cfg).v;
  const auto report = discover_structure(est, cfg.geometry);
  EXPECT_EQ(report.score, 1.0);
  EXPECT_EQ(report.grouping, Grouping::ColumnConstant);
  EXPECT_EQ(report.deviation.rows(), 4);
  EXPECT_LT(report.deviation.maxCoeff(), 1e-12);
}

TEST(Structure, IidEstimateScoresNearZero) {
  std::mt19937_64 rng(11);
  const ScenarioConfig cfg = config_for(8, 8, 64, 8);
  EstimateFull est;
  est.v = generic_channel(rng, cfg).v;
  const auto report = discover_structure(est, cfg.geometry);
  EXPECT_LT(report.score, 0.05);
  EXPECT_EQ(report.grouping, Grouping::None);
  EXPECT_GT(report.deviation.mean(), 0.5);
}

TEST(Structure, ZeroMeanCellCountsAsDeviating) {
  const ArrayGeometry g = ArrayGeometry::for_carrier(1, 2, 4e9);
  EstimateFull est;
  est.v = CMatrix(2, 1);
  est.v << Complex(1.0, 0.0), Complex(-1.0, 0.0);
  const auto report = discover_structure(est, g);
  EXPECT_EQ(report.deviation(0, 0), 1.0);
  EXPECT_EQ(report.score, 0.0);
}

TEST(Structure, GeneratedChannelWithMildNoiseIsColumnConstant) {
  ScenarioConfig cfg = ScenarioConfig::desk_scale();
  cfg.noise_psd_w_per_hz *= 1e-4;
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 64);
  const PilotGramSolver solver(extended_pilot_matrix(book));
  const auto ch = generate_scenario(cfg, {14.0, 1.0}, true, 2);
  const auto est = ls_full(simulate_reception(ch, book, cfg, options(true, false, 5)), solver, cfg);
  const auto report = discover_structure(est, cfg.geometry);
  EXPECT_EQ(report.grouping, Grouping::ColumnConstant) << "score " << report.score;
}

TEST(LsReduced, ExactRecoveryOnDataset2) {
  std::mt19937_64 rng(12);
  const ScenarioConfig cfg = config_for(8, 8);
  const auto ch = structured_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset2, 64);
  const auto est =
      ls_reduced(simulate_reception(ch, book, cfg, options(false, false)), book, cfg.geometry, cfg);
  const AbsorbedChannel truth = absorbed_channel(ch, cfg);
  EXPECT_LT(rel(est.hd, truth.hd), 1e-8);
  EXPECT_LT(rel(est.v_row, truth.v.topRows(8)), 1e-8);
  EXPECT_LT(rel(est.expand(cfg.geometry), truth.v), 1e-8);
}

TEST(LsReduced, MatchesColumnAveragedFullEstimate) {
  std::mt19937_64 rng(13);
  const ScenarioConfig cfg = config_for(4, 4, 32, 4);
  const auto ch = structured_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 16);
  const auto obs = simulate_reception(ch, book, cfg, options(false, false));
  const auto full = ls_full(obs, book, cfg);
  const auto reduced = ls_reduced(obs, book, cfg.geometry, cfg);
  CMatrix averaged = CMatrix::Zero(4, 4);
  for (Eigen::Index n = 0; n < 16; ++n) averaged.row(n % 4) += full.v.row(n) / 4.0;
  EXPECT_LT(rel(reduced.v_row, averaged), 1e-8);
  EXPECT_LT(rel(reduced.hd, full.hd), 1e-8);
}

TEST(LsReduced, SingleColumnArrayNeedsTwoBlocks) {
  std::mt19937_64 rng(14);
  const ScenarioConfig cfg = config_for(1, 4, 16, 4);
  const auto ch = structured_channel(rng, cfg);
  SignMatrix s(4, 2);
  s.col(0).setOnes();
  s.col(1).setConstant(-1);
  const PilotBook book = PilotBook::custom(s);
  const RMatrix reduced = reduced_extended_pilot_matrix(book, cfg.geometry);
  ASSERT_EQ(reduced.rows(), 2);
  const auto est =
      ls_reduced(simulate_reception(ch, book, cfg, options(false, false)), book, cfg.geometry, cfg);
  const AbsorbedChannel truth = absorbed_channel(ch, cfg);
  EXPECT_LT(rel(est.v_row, truth.v.topRows(1)), 1e-8);
  EXPECT_LT(rel(est.hd, truth.hd), 1e-8);
}

TEST(LsReduced, ResidualOfNestedBooksIsMonotone) {
  // Each estimate is fitted to the first C blocks; adding equations can only
  // raise the minimum, so the own-data residual never decreases.
  std::mt19937_64 rng(15);
  const ScenarioConfig cfg = config_for(4, 4, 32, 4);
  const auto ch = structured_channel(rng, cfg);
  const PilotBook book = build_pilot_book(PilotLayout::Dataset1, 16);
  const auto obs = simulate_reception(ch, book, cfg, options(true, true, 3));
  double previous = 0.0;
  for (Eigen::Index c = 8; c <= 64; c += 8) {
    const PilotBook sub = PilotBook::custom(book.signs.leftCols(c));
    PilotObservations part = obs;
    part.z = obs.z.leftCols(c);
    const auto est = ls_reduced(part, sub, cfg.geometry, cfg);
    EXPECT_GE(est.residual_norm, previous * (1.0 - 1e-12)) << "C=" << c;
    previous = est.residual_norm;
  }
}
