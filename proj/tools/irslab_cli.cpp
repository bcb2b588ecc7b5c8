// SPDX-License-Identifier: Apache-2.0
//
// irslab: scenario generation, pilot reception, estimation and configuration
// for a binary IRS in front of an OFDM link.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "irslab/pilots.hpp"
#include "irslab/pipeline.hpp"

namespace {

using namespace irslab;
using namespace irslab::cli;

void add_scale(CLI::App* app, ScaleOptions& scale, std::string& scale_name) {
  app->add_option("--scale", scale_name, "desk (8x8, K=64, M=8) or paper (64x64, K=500, M=20)")
      ->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--nh", scale.nh, "Horizontal element count override");
  app->add_option("--nv", scale.nv, "Vertical element count override");
  app->add_option("--k,--subcarriers", scale.subcarriers, "Subcarrier count override");
  app->add_option("--m,--taps", scale.taps, "Channel tap count override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary IRS OFDM channel estimation and configuration"};
  app.require_subcommand(1);

  ScenarioGenOptions gen;
  std::string scale_name = "desk";
  auto* gen_cmd = app.add_subcommand("scenario-gen", "Draw UE positions and channel realizations");
  gen_cmd->add_option("--run-dir", gen.run_dir, "Run directory")->required();
  add_scale(gen_cmd, gen.scale, scale_name);
  gen_cmd->add_option("--ues", gen.ues, "Number of UEs")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--nlos-fraction", gen.nlos_fraction, "Share of NLOS UEs");
  gen_cmd->add_option("--seed", gen.seed, "Scenario seed (IRSLAB_SEED overrides)");
  gen_cmd->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);

  PilotsOptions pil;
  std::string pil_layout = "dataset2";
  std::string noise = "on", coupling = "on";
  auto* pil_cmd = app.add_subcommand("pilots", "Simulate pilot reception for every UE");
  pil_cmd->add_option("--run-dir", pil.run_dir, "Run directory")->required();
  pil_cmd->add_option("--layout", pil_layout, "dataset1 or dataset2");
  pil_cmd->add_option("--noise", noise, "Receiver noise on|off")->check(CLI::IsMember({"on", "off"}));
  pil_cmd->add_option("--coupling", coupling, "Inter-element coupling on|off")
      ->check(CLI::IsMember({"on", "off"}));
  pil_cmd->add_option("--noise-seed", pil.noise_seed, "Base seed for receiver noise");
  pil_cmd->add_option("--jobs", pil.jobs, "Worker threads")->check(CLI::PositiveNumber);

  EstimateOptions est;
  std::string est_mode = "reduced";
  std::string est_layout;
  auto* est_cmd = app.add_subcommand("estimate", "Least-squares channel estimation");
  est_cmd->add_option("--run-dir", est.run_dir, "Run directory")->required();
  est_cmd->add_option("--mode", est_mode, "full, reduced or noise");
  est_cmd->add_option("--layout", est_layout, "dataset1 or dataset2");
  est_cmd->add_option("--jobs", est.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ConfigureOptions conf;
  std::string conf_method = "power";
  std::string conf_layout = "dataset2";
  auto* conf_cmd = app.add_subcommand("configure", "Choose IRS states and evaluate the rate");
  conf_cmd->add_option("--run-dir", conf.run_dir, "Run directory")->required();
  conf_cmd->add_option("--method", conf_method, "power, best-pilot or all-off");
  conf_cmd->add_option("--layout", conf_layout, "Pilot layout the inputs came from");
  conf_cmd->add_option("--max-iters", conf.max_iters, "Power method iteration cap");
  conf_cmd->add_option("--random-starts", conf.random_starts, "Extra random initializations");
  conf_cmd->add_option("--jobs", conf.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Summarize rates into rates.csv and summary.json");
  rep_cmd->add_option("--run-dir", rep.run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  return run_guarded([&] {
    if (*gen_cmd) {
      gen.scale.paper = scale_name == "paper";
      cmd_scenario_gen(gen);
    } else if (*pil_cmd) {
      pil.layout = parse_pilot_layout(pil_layout);
      pil.noise = noise == "on";
      pil.coupling = coupling == "on";
      cmd_pilots(pil);
    } else if (*est_cmd) {
      est.mode = parse_estimate_mode(est_mode);
      if (!est_layout.empty()) est.layout = parse_pilot_layout(est_layout);
      cmd_estimate(est);
    } else if (*conf_cmd) {
      conf.method = parse_configure_method(conf_method);
      conf.layout = parse_pilot_layout(conf_layout);
      cmd_configure(conf);
    } else if (*rep_cmd) {
      cmd_report(rep);
    }
  });
}
