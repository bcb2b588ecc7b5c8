// SPDX-License-Identifier: Apache-2.0

#include "irslab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "json.hpp"

#include "irslab/circuit.hpp"
#include "irslab/configurator.hpp"
#include "irslab/errors.hpp"
#include "irslab/estimation.hpp"
#include "irslab/io.hpp"

namespace irslab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const RankError& e) {
    std::cerr << "rank error: " << e.what() << "\n";
    return kExitRankError;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

ScenarioConfig scaled_config(const ScaleOptions& scale) {
  ScenarioConfig cfg = scale.paper ? ScenarioConfig::paper_scale() : ScenarioConfig::desk_scale();
  const std::size_t nh = scale.nh.value_or(cfg.geometry.nh);
  const std::size_t nv = scale.nv.value_or(cfg.geometry.nv);
  cfg.geometry = ArrayGeometry::for_carrier(nh, nv, cfg.carrier_hz);
  cfg.subcarriers = scale.subcarriers.value_or(cfg.subcarriers);
  cfg.taps = scale.taps.value_or(cfg.taps);
  return cfg;
}

std::uint64_t seed_from_environment(std::uint64_t seed) {
  const char* env = std::getenv("IRSLAB_SEED");
  if (env == nullptr || *env == '\0') return seed;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw ConfigError(std::string("IRSLAB_SEED is not an unsigned integer: ") + env);
  }
  return value;
}

std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

fs::path ue_dir(const fs::path& run_dir, std::size_t ue_id) {
  char name[32];
  std::snprintf(name, sizeof name, "ue_%04zu", ue_id);
  return run_dir / name;
}

EstimateMode parse_estimate_mode(const std::string& name) {
  if (name == "full") return EstimateMode::Full;
  if (name == "reduced") return EstimateMode::Reduced;
  if (name == "noise") return EstimateMode::Noise;
  throw ConfigError("unknown estimation mode '" + name + "'");
}

ConfigureMethod parse_configure_method(const std::string& name) {
  if (name == "power") return ConfigureMethod::Power;
  if (name == "best-pilot") return ConfigureMethod::BestPilot;
  if (name == "all-off") return ConfigureMethod::AllOff;
  throw ConfigError("unknown configuration method '" + name + "'");
}

std::string to_string(ConfigureMethod method) {
  switch (method) {
    case ConfigureMethod::Power:
      return "power";
    case ConfigureMethod::BestPilot:
      return "best-pilot";
    case ConfigureMethod::AllOff:
      return "all-off";
  }
  return "power";
}

namespace {

/// Runs fn(0..count-1) on up to `jobs` threads; the first exception wins.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Run {
  fs::path dir;
  std::string scenario_text;
  io::ScenarioFile scenario;
};

Run load_run(const fs::path& dir) {
  Run run;
  run.dir = dir;
  const fs::path path = dir / "scenario.json";
  if (!fs::exists(path)) throw IoError("no scenario.json in " + dir.string());
  run.scenario_text = io::read_text(path);
  run.scenario = io::parse_scenario(run.scenario_text);
  return run;
}

/// Stage digest over the scenario and the stage's own options.
std::string stage_manifest(const Run& run, const std::string& stage, const json& options) {
  json manifest{{"stage", stage},
                {"scenario_digest", digest(run.scenario_text)},
                {"options", options}};
  const std::string text = manifest.dump();
  const std::string hash = digest(text);
  manifest["manifest_hash"] = hash;
  io::write_text(run.dir / ("manifest_" + stage + ".json"), manifest.dump(2) + "\n");
  return hash;
}

std::string layout_name(PilotLayout layout) { return std::string(to_string(layout)); }

fs::path pilots_path(const fs::path& ue, PilotLayout layout) {
  return ue / ("pilots_" + layout_name(layout) + ".irsz");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw IoError("bad JSON in " + path.string() + ": " + e.what());
  }
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw IoError(path.string() + " not found; run " + hint + " first");
}

struct LoadedPilots {
  PilotObservations obs;
  PilotBook book;
};

LoadedPilots load_pilots(const Run& run, std::size_t ue_id, PilotLayout layout) {
  const fs::path ue = ue_dir(run.dir, ue_id);
  const fs::path z_path = pilots_path(ue, layout);
  require_file(z_path, "'pilots --layout " + layout_name(layout) + "'");
  const json meta = read_json(ue / ("pilots_" + layout_name(layout) + ".json"));
  LoadedPilots out;
  out.obs.z = io::read_complex_matrix(z_path);
  out.obs.ue_id = ue_id;
  out.obs.noise_seed = meta.at("noise_seed").get<std::uint64_t>();
  out.book = build_pilot_book(layout, run.scenario.config.geometry.size());
  return out;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t ue_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(ue_id), static_cast<std::uint32_t>(ue_id >> 32),
                    0x70696c74u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

std::string states_string(const StateVector& states) {
  std::string s(states.size(), '0');
  for (std::size_t n = 0; n < states.size(); ++n) {
    if (states[n] == ElementState::On) s[n] = '1';
  }
  return s;
}

}  // namespace

void cmd_scenario_gen(const ScenarioGenOptions& options) {
  ScenarioConfig cfg = scaled_config(options.scale);
  cfg.rng_seed = seed_from_environment(options.seed);
  cfg.validate();
  const std::size_t n = cfg.geometry.size();
  if (!std::has_single_bit(n)) {
    throw ConfigError("N = " + std::to_string(n) +
                      " elements; Hadamard pilot layouts need a power of two");
  }
  if (!(options.nlos_fraction >= 0.0 && options.nlos_fraction <= 1.0)) {
    throw ConfigError("NLOS fraction must lie in [0, 1]");
  }
  if (options.scale.paper) {
    std::cerr << "warning: paper scale (N = " << n << ", K = " << cfg.subcarriers
              << ") needs gigabytes of memory and long run times for dataset1 pilots\n";
  }

  io::ScenarioFile scenario;
  scenario.config = cfg;
  std::mt19937_64 rng(cfg.rng_seed);
  const auto& gen = cfg.generator;
  std::uniform_real_distribution<double> ux(gen.area_center.x() - gen.area_size.x() / 2,
                                            gen.area_center.x() + gen.area_size.x() / 2);
  std::uniform_real_distribution<double> uy(gen.area_center.y() - gen.area_size.y() / 2,
                                            gen.area_center.y() + gen.area_size.y() / 2);
  for (std::size_t id = 0; id < options.ues; ++id) {
    const double x = ux(rng);
    const double y = uy(rng);
    scenario.ues.push_back({id, x, y, true});
  }
  std::vector<std::size_t> order(options.ues);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto nlos = static_cast<std::size_t>(
      std::llround(options.nlos_fraction * static_cast<double>(options.ues)));
  for (std::size_t k = 0; k < nlos; ++k) scenario.ues[order[k]].los = false;

  fs::create_directories(options.run_dir);
  const std::string text = io::format_scenario(scenario);
  io::write_text(options.run_dir / "scenario.json", text);
  Run run{options.run_dir, text, scenario};
  const std::string hash = stage_manifest(
      run, "scenario-gen",
      {{"ues", options.ues}, {"nlos_fraction", options.nlos_fraction}, {"seed", cfg.rng_seed}});

  parallel_for(scenario.ues.size(), options.jobs, [&](std::size_t k) {
    const auto& ue = scenario.ues[k];
    const ChannelRealization ch = generate_scenario(cfg, {ue.x_m, ue.y_m}, ue.los, ue.id);
    const fs::path dir = ue_dir(options.run_dir, ue.id);
    io::write_realization(dir, ch);
    io::write_text(dir / "ue.json", json{{"id", ue.id},
                                         {"x_m", ue.x_m},
                                         {"y_m", ue.y_m},
                                         {"los", ue.los},
                                         {"manifest_hash", hash}}
                                            .dump(2) +
                                        "\n");
  });
}

void cmd_pilots(const PilotsOptions& options) {
  const Run run = load_run(options.run_dir);
  const ScenarioConfig& cfg = run.scenario.config;
  const std::uint64_t base_seed = options.noise_seed.value_or(cfg.rng_seed);
  const std::string hash =
      stage_manifest(run, "pilots-" + layout_name(options.layout),
                     {{"layout", layout_name(options.layout)},
                      {"noise", options.noise},
                      {"coupling", options.coupling},
                      {"noise_seed", base_seed}});

  const PilotBook book = build_pilot_book(options.layout, cfg.geometry.size());
  const CouplingKernel kernel = CouplingKernel::build(cfg.geometry);
  parallel_for(run.scenario.ues.size(), options.jobs, [&](std::size_t k) {
    const auto& ue = run.scenario.ues[k];
    const fs::path dir = ue_dir(run.dir, ue.id);
    require_file(dir / "channel.json", "scenario-gen");
    const ChannelRealization ch = io::read_realization(dir);
    ReceptionOptions rx;
    rx.coupling_enabled = options.coupling;
    rx.noise_enabled = options.noise;
    rx.noise_seed = mix_seed(base_seed, ue.id);
    rx.ue_id = ue.id;
    const PilotObservations obs = simulate_reception(ch, book, cfg, kernel, rx);
    io::write_matrix(pilots_path(dir, options.layout), obs.z);
    io::write_text(dir / ("pilots_" + layout_name(options.layout) + ".json"),
                   json{{"layout", layout_name(options.layout)},
                        {"blocks", book.columns()},
                        {"noise", options.noise},
                        {"coupling", options.coupling},
                        {"noise_seed", rx.noise_seed},
                        {"manifest_hash", hash}}
                           .dump(2) +
                       "\n");
  });
}

void cmd_estimate(const EstimateOptions& options) {
  const Run run = load_run(options.run_dir);
  const ScenarioConfig& cfg = run.scenario.config;
  const PilotLayout layout = options.layout.value_or(
      options.mode == EstimateMode::Reduced ? PilotLayout::Dataset2 : PilotLayout::Dataset1);
  const std::string lname = layout_name(layout);
  const char* mode_name = options.mode == EstimateMode::Full      ? "full"
                          : options.mode == EstimateMode::Reduced ? "reduced"
                                                                  : "noise";
  const std::string hash = stage_manifest(run, std::string("estimate-") + mode_name + "-" + lname,
                                          {{"mode", mode_name}, {"layout", lname}});

  const PilotBook book = build_pilot_book(layout, cfg.geometry.size());

  if (options.mode == EstimateMode::Noise) {
    parallel_for(run.scenario.ues.size(), options.jobs, [&](std::size_t k) {
      const auto id = run.scenario.ues[k].id;
      const LoadedPilots p = load_pilots(run, id, layout);
      const double n0 = estimate_noise_psd(p.obs, book);
      io::write_text(ue_dir(run.dir, id) / ("noise_" + lname + ".json"),
                     json{{"noise_psd_w_per_hz", n0},
                          {"repeated_pairs", book.repeated_pairs.size()},
                          {"manifest_hash", hash}}
                             .dump(2) +
                         "\n");
      std::cout << "ue " << id << ": N0 estimate " << n0 << " W/Hz\n";
    });
    return;
  }

  if (options.mode == EstimateMode::Full) {
    if (book.columns() < book.elements() + 1) {
      throw RankError(lname + " has C = " + std::to_string(book.columns()) + " < N + 1 = " +
                      std::to_string(book.elements() + 1) +
                      " pilot blocks; the full estimate is not unique (use --mode reduced)");
    }
    const PilotGramSolver solver(extended_pilot_matrix(book));
    parallel_for(run.scenario.ues.size(), options.jobs, [&](std::size_t k) {
      const auto id = run.scenario.ues[k].id;
      const LoadedPilots p = load_pilots(run, id, layout);
      const EstimateFull est = ls_full(p.obs, solver, cfg);
      const StructureReport report = discover_structure(est, cfg.geometry);
      const fs::path dir = ue_dir(run.dir, id);
      io::write_matrix(dir / ("estimate_full_" + lname + "_hd.irsz"), CMatrix(est.hd));
      io::write_matrix(dir / ("estimate_full_" + lname + "_v.irsz"), est.v);
      io::write_matrix(dir / ("structure_" + lname + "_deviation.irsz"), report.deviation);
      io::write_text(dir / ("structure_" + lname + ".json"),
                     json{{"score", report.score},
                          {"grouping", std::string(to_string(report.grouping))},
                          {"residual_norm", est.residual_norm},
                          {"gram_condition", est.gram_condition},
                          {"manifest_hash", hash}}
                             .dump(2) +
                         "\n");
    });
    return;
  }

  const PilotGramSolver solver(reduced_extended_pilot_matrix(book, cfg.geometry));
  parallel_for(run.scenario.ues.size(), options.jobs, [&](std::size_t k) {
    const auto id = run.scenario.ues[k].id;
    const LoadedPilots p = load_pilots(run, id, layout);
    const EstimateReduced est = ls_reduced(p.obs, solver, cfg);
    const fs::path dir = ue_dir(run.dir, id);
    io::write_matrix(dir / ("estimate_reduced_" + lname + "_hd.irsz"), CMatrix(est.hd));
    io::write_matrix(dir / ("estimate_reduced_" + lname + "_vrow.irsz"), est.v_row);
    io::write_text(dir / ("estimate_reduced_" + lname + ".json"),
                   json{{"residual_norm", est.residual_norm},
                        {"gram_condition", est.gram_condition},
                        {"manifest_hash", hash}}
                           .dump(2) +
                       "\n");
  });
}

void cmd_configure(const ConfigureOptions& options) {
  const Run run = load_run(options.run_dir);
  const ScenarioConfig& cfg = run.scenario.config;
  const std::string lname = layout_name(options.layout);
  const std::string method = to_string(options.method);
  const std::string hash = stage_manifest(run, "configure-" + method,
                                          {{"method", method},
                                           {"layout", lname},
                                           {"max_iters", options.max_iters},
                                           {"random_starts", options.random_starts}});
  const CouplingKernel kernel = CouplingKernel::build(cfg.geometry);
  const std::optional<PilotBook> book =
      options.method == ConfigureMethod::BestPilot
          ? std::optional<PilotBook>(build_pilot_book(options.layout, cfg.geometry.size()))
          : std::nullopt;

  parallel_for(run.scenario.ues.size(), options.jobs, [&](std::size_t k) {
    const auto id = run.scenario.ues[k].id;
    const fs::path dir = ue_dir(run.dir, id);
    require_file(dir / "channel.json", "scenario-gen");
    const ChannelRealization ch = io::read_realization(dir);

    json result{{"method", method}, {"ue_id", id}, {"los", ch.los}, {"manifest_hash", hash}};
    StateVector states;
    switch (options.method) {
      case ConfigureMethod::AllOff:
        states = all_off_benchmark(cfg.geometry);
        break;
      case ConfigureMethod::BestPilot: {
        const LoadedPilots p = load_pilots(run, id, options.layout);
        const BestPilot best = best_pilot_benchmark(p.obs, *book, cfg);
        states = book->states(best.column);
        result["pilot_column"] = best.column;
        result["estimated_rate_bps"] = best.rate;
        break;
      }
      case ConfigureMethod::Power: {
        const fs::path hd_path = dir / ("estimate_reduced_" + lname + "_hd.irsz");
        require_file(hd_path, "'estimate --mode reduced --layout " + lname + "'");
        EstimateReduced est;
        est.hd = io::read_complex_matrix(hd_path).col(0);
        est.v_row = io::read_complex_matrix(dir / ("estimate_reduced_" + lname + "_vrow.irsz"));
        PowerMethodOptions pm;
        pm.max_iters = options.max_iters;
        pm.random_starts = options.random_starts;
        pm.seed = mix_seed(cfg.rng_seed, id);
        const ConfigurationResult cr = configure_power_method(est, cfg.geometry, pm);
        states = cr.states;
        result["c"] = std::vector<int>(cr.solution.c.data(),
                                       cr.solution.c.data() + cr.solution.c.size());
        result["objective"] = cr.solution.objective;
        result["iterations"] = cr.solution.iterations;
        result["termination"] = std::string(to_string(cr.solution.termination));
        break;
      }
    }
    result["states"] = states_string(states);
    result["rate_bps"] = evaluate_configuration(states, ch, cfg, kernel, true);
    io::write_text(dir / ("result_" + method + ".json"), result.dump(2) + "\n");
  });
}

ReportSummary cmd_report(const ReportOptions& options) {
  const Run run = load_run(options.run_dir);
  std::vector<io::RateRow> rows;
  ReportSummary summary;
  std::size_t wins = 0;
  for (const auto& ue : run.scenario.ues) {
    const fs::path dir = ue_dir(run.dir, ue.id);
    auto rate = [&](ConfigureMethod m) {
      const fs::path path = dir / ("result_" + to_string(m) + ".json");
      require_file(path, "'configure --method " + to_string(m) + "'");
      return read_json(path).at("rate_bps").get<double>();
    };
    io::RateRow row{ue.id, ue.los, rate(ConfigureMethod::AllOff), rate(ConfigureMethod::BestPilot),
                    rate(ConfigureMethod::Power)};
    summary.sum_all_off += row.rate_all_off;
    summary.sum_best_pilot += row.rate_best_pilot;
    summary.sum_power += row.rate_power_method;
    if (row.rate_power_method >= row.rate_best_pilot) ++wins;
    rows.push_back(row);
  }
  summary.ues = rows.size();
  if (summary.sum_all_off > 0.0) {
    summary.ratio_power_all_off = summary.sum_power / summary.sum_all_off;
    summary.ratio_best_pilot_all_off = summary.sum_best_pilot / summary.sum_all_off;
  }
  if (!rows.empty()) {
    summary.power_beats_best_pilot = static_cast<double>(wins) / static_cast<double>(rows.size());
  }

  const std::string hash = stage_manifest(run, "report", json::object());
  io::write_text(run.dir / "rates.csv", io::export_rate_csv(rows));
  io::write_text(run.dir / "summary.json",
                 json{{"ues", summary.ues},
                      {"sum_rate_all_off_bps", summary.sum_all_off},
                      {"sum_rate_best_pilot_bps", summary.sum_best_pilot},
                      {"sum_rate_power_method_bps", summary.sum_power},
                      {"ratio_power_all_off", summary.ratio_power_all_off},
                      {"ratio_best_pilot_all_off", summary.ratio_best_pilot_all_off},
                      {"power_at_least_best_pilot_fraction", summary.power_beats_best_pilot},
                      {"manifest_hash", hash}}
                         .dump(2) +
                     "\n");
  std::cout << "UEs: " << summary.ues << "\n"
            << "sum rate all-off:    " << summary.sum_all_off / 1e6 << " Mbit/s\n"
            << "sum rate best-pilot: " << summary.sum_best_pilot / 1e6 << " Mbit/s\n"
            << "sum rate power:      " << summary.sum_power / 1e6 << " Mbit/s\n"
            << "ratio power/all-off: " << summary.ratio_power_all_off << "\n";
  return summary;
}

}  // namespace irslab::cli
