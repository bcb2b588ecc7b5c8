// SPDX-License-Identifier: Apache-2.0

#include "irslab/pilots.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "irslab/errors.hpp"

namespace irslab {

std::string_view to_string(PilotLayout layout) {
  switch (layout) {
    case PilotLayout::Dataset1:
      return "dataset1";
    case PilotLayout::Dataset2:
      return "dataset2";
    case PilotLayout::Custom:
      return "custom";
  }
  return "custom";
}

PilotLayout parse_pilot_layout(std::string_view name) {
  if (name == "dataset1") return PilotLayout::Dataset1;
  if (name == "dataset2") return PilotLayout::Dataset2;
  if (name == "custom") return PilotLayout::Custom;
  throw ConfigError("unknown pilot layout '" + std::string(name) + "'");
}

SignMatrix hadamard(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) {
    throw ConfigError("Hadamard pilots need a power-of-two element count, got " +
                      std::to_string(n));
  }
  SignMatrix h(1, 1);
  h(0, 0) = 1;
  while (static_cast<std::size_t>(h.rows()) < n) {
    const auto m = h.rows();
    SignMatrix next(2 * m, 2 * m);
    next << h, h, h, -h;
    h = std::move(next);
  }
  return h;
}

std::vector<std::pair<std::size_t, std::size_t>> find_repeated_columns(const SignMatrix& signs) {
  std::map<std::vector<int>, std::size_t> first_seen;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (Eigen::Index c = 0; c < signs.cols(); ++c) {
    std::vector<int> key(signs.col(c).data(), signs.col(c).data() + signs.rows());
    auto [it, inserted] = first_seen.emplace(std::move(key), static_cast<std::size_t>(c));
    if (!inserted) pairs.emplace_back(it->second, static_cast<std::size_t>(c));
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

PilotBook PilotBook::custom(SignMatrix signs) {
  if ((signs.array().abs() != 1).any()) {
    throw ConfigError("pilot book entries must be +1 or -1");
  }
  PilotBook book;
  book.signs = std::move(signs);
  book.layout = PilotLayout::Custom;
  book.repeated_pairs = find_repeated_columns(book.signs);
  return book;
}

StateVector PilotBook::states(std::size_t column) const {
  StateVector out(elements());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = state_from_sign(signs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(column)));
  }
  return out;
}

PilotBook build_pilot_book(PilotLayout layout, std::size_t n) {
  const SignMatrix h = hadamard(n);
  PilotBook book;
  book.layout = layout;
  switch (layout) {
    case PilotLayout::Dataset1: {
      const SignMatrix flipped = h.colwise().reverse();
      book.signs.resize(h.rows(), 4 * h.cols());
      book.signs << h, -h, flipped, -flipped;
      break;
    }
    case PilotLayout::Dataset2:
      book.signs = h;
      break;
    case PilotLayout::Custom:
      throw ConfigError("custom pilot books are built with PilotBook::custom");
  }
  book.repeated_pairs = find_repeated_columns(book.signs);
  return book;
}

PilotObservations simulate_reception(const ChannelRealization& ch, const PilotBook& book,
                                     const ScenarioConfig& cfg, const CouplingKernel& kernel,
                                     const ReceptionOptions& options) {
  if (book.elements() != static_cast<std::size_t>(ch.v.rows()) ||
      kernel.size() != book.elements()) {
    throw std::invalid_argument("pilot book, kernel and channel disagree on the element count");
  }
  const std::size_t columns = book.columns();
  const CMatrix f = dft_matrix(cfg.subcarriers, cfg.taps);
  const double amplitude = cfg.pilot_amplitude();
  const double noise_std = std::sqrt(cfg.noise_psd_w_per_hz / 2.0);

  PilotObservations obs;
  obs.ue_id = options.ue_id;
  obs.noise_seed = options.noise_seed;
  obs.z.resize(static_cast<Eigen::Index>(cfg.subcarriers), static_cast<Eigen::Index>(columns));

  // Composite taps for all blocks, then one K x M by M x C product.
  CMatrix taps(static_cast<Eigen::Index>(cfg.taps), static_cast<Eigen::Index>(columns));
  const CMatrix vt = ch.v.transpose();
  for (std::size_t c = 0; c < columns; ++c) {
    const CVector omega =
        reflection_vector(book.states(c), kernel, cfg.circuit, cfg.carrier_hz,
                          options.coupling_enabled);
    taps.col(static_cast<Eigen::Index>(c)) = ch.hd + vt * omega;
  }
  obs.z.noalias() = amplitude * (f * taps);

  if (options.noise_enabled) {
    for (std::size_t c = 0; c < columns; ++c) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.noise_seed),
                        static_cast<std::uint32_t>(options.noise_seed >> 32),
                        static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss(0.0, noise_std);
      for (Eigen::Index k = 0; k < obs.z.rows(); ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        obs.z(k, static_cast<Eigen::Index>(c)) += Complex{re, im};
      }
    }
  }
  return obs;
}

PilotObservations simulate_reception(const ChannelRealization& ch, const PilotBook& book,
                                     const ScenarioConfig& cfg, const ReceptionOptions& options) {
  return simulate_reception(ch, book, cfg, CouplingKernel::build(cfg.geometry), options);
}

}  // namespace irslab
