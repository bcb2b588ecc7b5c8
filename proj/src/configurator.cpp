// SPDX-License-Identifier: Apache-2.0

#include "irslab/configurator.hpp"

#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace irslab {

double QuadraticForm::objective(const SignVector& c) const {
  const CVector x = c.cast<double>().cast<Complex>();
  return (x.adjoint() * gram * x)(0, 0).real();
}

QuadraticForm build_quadratic_form(const EstimateReduced& est, std::size_t nv) {
  CMatrix g(est.hd.size(), est.v_row.rows() + 1);
  g.col(0) = est.hd;
  g.rightCols(est.v_row.rows()) = static_cast<double>(nv) * est.v_row.transpose();
  QuadraticForm q;
  q.gram = g.adjoint() * g;
  return q;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::CycleDetected:
      return "cycle-detected";
    case Termination::IterationCap:
      return "iteration-cap";
  }
  return "iteration-cap";
}

namespace {

SignVector project(const CVector& d) {
  const Complex anchor = std::conj(d[0]);
  SignVector c(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) c[i] = (anchor * d[i]).real() >= 0.0 ? 1 : -1;
  return c;
}

std::vector<int> key(const SignVector& c) { return {c.data(), c.data() + c.size()}; }

}  // namespace

PowerMethodResult binary_power_method(const QuadraticForm& q, const SignVector& init,
                                      std::size_t max_iters) {
  if (static_cast<std::size_t>(init.size()) != q.size()) {
    throw std::invalid_argument("initial vector has the wrong length");
  }
  if ((init.array().abs() != 1).any()) {
    throw std::invalid_argument("initial vector entries must be +1 or -1");
  }

  // c and -c give the same objective; keep the orbit on c[0] = +1.
  SignVector c = init[0] > 0 ? init : SignVector(-init);

  PowerMethodResult best{c, q.objective(c), 0, Termination::IterationCap};
  std::set<std::vector<int>> visited{key(c)};
  for (std::size_t it = 1; it <= max_iters; ++it) {
    const CVector d = q.gram * c.cast<double>().cast<Complex>();
    SignVector next = project(d);
    best.iterations = it;
    if (next == c) {
      best.termination = Termination::Converged;
      return best;
    }
    const double value = q.objective(next);
    if (value >= best.objective) {
      best.c = next;
      best.objective = value;
    }
    if (!visited.insert(key(next)).second) {
      best.termination = Termination::CycleDetected;
      return best;
    }
    c = std::move(next);
  }
  best.termination = Termination::IterationCap;
  return best;
}

PowerMethodResult binary_power_method_multistart(const QuadraticForm& q,
                                                 const PowerMethodOptions& options) {
  const auto n = static_cast<Eigen::Index>(q.size());
  PowerMethodResult best = binary_power_method(q, SignVector::Ones(n), options.max_iters);

  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t r = 0; r < options.random_starts; ++r) {
    SignVector init(n);
    for (Eigen::Index i = 0; i < n; ++i) init[i] = coin(rng) ? 1 : -1;
    PowerMethodResult candidate = binary_power_method(q, init, options.max_iters);
    if (candidate.objective > best.objective) best = std::move(candidate);
  }
  return best;
}

StateVector states_from_c(const SignVector& c, const ArrayGeometry& g) {
  if (static_cast<std::size_t>(c.size()) != g.nh + 1) {
    throw std::invalid_argument("configuration vector needs N_H + 1 = " + std::to_string(g.nh + 1) +
                                " entries, got " + std::to_string(c.size()));
  }
  if (c[0] != 1) throw std::invalid_argument("first configuration entry must be +1");
  StateVector states(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    states[n] = state_from_sign(c[static_cast<Eigen::Index>(g.horizontal_index(n) + 1)]);
  }
  return states;
}

ConfigurationResult configure_power_method(const EstimateReduced& est, const ArrayGeometry& g,
                                           const PowerMethodOptions& options) {
  ConfigurationResult out;
  out.solution = binary_power_method_multistart(build_quadratic_form(est, g.nv), options);
  out.states = states_from_c(out.solution.c, g);
  return out;
}

BestPilot best_pilot_benchmark(const PilotObservations& obs, const PilotBook& book,
                               const ScenarioConfig& cfg) {
  if (static_cast<std::size_t>(obs.z.cols()) != book.columns() || book.columns() == 0) {
    throw std::invalid_argument("observations and pilot book disagree on the block count");
  }
  BestPilot best{0, -1.0};
  const double scale = 1.0 / cfg.pilot_amplitude();
  for (Eigen::Index c = 0; c < obs.z.cols(); ++c) {
    const double rate = sum_rate(scale * obs.z.col(c), cfg);
    if (rate > best.rate) best = {static_cast<std::size_t>(c), rate};
  }
  return best;
}

StateVector all_off_benchmark(const ArrayGeometry& g) {
  return StateVector(g.size(), ElementState::Off);
}

double evaluate_configuration(const StateVector& states, const ChannelRealization& ch,
                              const ScenarioConfig& cfg, const CouplingKernel& kernel,
                              bool coupling_enabled) {
  const CVector omega =
      reflection_vector(states, kernel, cfg.circuit, cfg.carrier_hz, coupling_enabled);
  return sum_rate(ofdm_response(ch.hd, ch.v, omega, cfg.subcarriers), cfg);
}

}  // namespace irslab
