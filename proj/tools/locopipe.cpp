/* Copyright 2026 The locopipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// locopipe: train, simulate and chart pipeline schedules from a config file.
//
//   locopipe train    --config exp.cfg --out results/
//   locopipe simulate --config exp.cfg
//   locopipe gantt    --config exp.cfg --mode PPLL --out results/

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "locopipe/config.hpp"
#include "locopipe/cost_model.hpp"
#include "locopipe/error.hpp"
#include "locopipe/experiment.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::string out = "out";
  bool deterministic = false;
  std::optional<std::uint64_t> seed;
};

locopipe::ExperimentConfig LoadConfig(const GlobalOptions& opts) {
  auto cfg = locopipe::ParseConfig(opts.config);
  if (opts.deterministic) cfg.deterministic = true;
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text).flush()) {
    throw locopipe::Error(locopipe::ErrorCode::kIoError,
                          "cannot write " + path.string());
  }
}

int Train(const GlobalOptions& opts) {
  const auto cfg = LoadConfig(opts);
  std::filesystem::create_directories(opts.out);
  const auto csv_path = std::filesystem::path(opts.out) / "metrics.csv";

  std::vector<locopipe::MetricsRecord> seen;
  auto on_record = [&](const locopipe::MetricsRecord& r) {
    seen.push_back(r);
    std::fprintf(stderr, "%s epoch %zu: loss %.4f train %.4f test %.4f\n",
                 std::string(locopipe::RunModeName(r.mode)).c_str(), r.epoch,
                 r.mean_loss(), r.train_acc, r.test_acc);
  };
  locopipe::ExperimentResult result;
  try {
    result = locopipe::RunExperiment(cfg, on_record);
  } catch (...) {
    if (!seen.empty()) {
      locopipe::WriteMetricsCsv(seen, csv_path);
      std::fprintf(stderr, "partial metrics (%zu records) written to %s\n",
                   seen.size(), csv_path.string().c_str());
    }
    throw;
  }
  locopipe::WriteMetricsCsv(result.records, csv_path);
  const std::string table = locopipe::ReportTable(result.report);
  WriteText(std::filesystem::path(opts.out) / "report.txt", table);
  std::cout << table;
  return 0;
}

int Simulate(const GlobalOptions& opts) {
  const auto cfg = LoadConfig(opts);
  const auto profiles = locopipe::ConfigProfiles(cfg);
  const locopipe::CommModel comm{cfg.profile_q};
  std::printf("%-8s  %14s  %14s  %14s\n", "mode", "formula", "simulated",
              "makespan");
  for (const auto mode : cfg.modes) {
    const auto est = locopipe::Estimate(mode, profiles, comm);
    const auto sim = locopipe::SimulateSchedule(profiles, comm, mode,
                                                cfg.sim_batches,
                                                cfg.buffer_capacity);
    std::printf("%-8s  %14.6f  %14.6f  %14.6f\n",
                std::string(locopipe::RunModeName(mode)).c_str(),
                est.batch_time, sim.steady_batch_time, sim.makespan);
  }
  const auto witness = locopipe::PpllBeatsPp(profiles, comm);
  std::printf("PPLL beats NaivePP: %s (backward %.6f, update %.6f, "
              "forward %.6f)\n",
              witness.beats ? "yes" : "no", witness.backward_margin,
              witness.update_margin, witness.forward_margin);
  return 0;
}

int Gantt(const GlobalOptions& opts, const std::string& mode_name) {
  const auto cfg = LoadConfig(opts);
  const auto mode = locopipe::ParseRunMode(mode_name);
  if (!mode) {
    throw locopipe::Error(locopipe::ErrorCode::kInvalidMode,
                          "unknown mode " + mode_name);
  }
  const auto sim = locopipe::SimulateSchedule(
      locopipe::ConfigProfiles(cfg), locopipe::CommModel{cfg.profile_q}, *mode,
      cfg.sim_batches, cfg.buffer_capacity);
  std::filesystem::create_directories(opts.out);
  const auto path =
      std::filesystem::path(opts.out) / ("gantt_" + mode_name + ".csv");
  WriteText(path, locopipe::RenderGanttCsv(sim.events));
  std::printf("%zu events, makespan %.6f, written to %s\n", sim.events.size(),
              sim.makespan, path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipelined local-learning experiments"};
  app.require_subcommand(1);
  GlobalOptions opts;
  std::uint64_t seed = 0;
  app.add_option("--config", opts.config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", opts.out, "Output directory")
      ->capture_default_str();
  app.add_flag("--deterministic", opts.deterministic,
               "Use the single-threaded deterministic runner");
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.fallthrough();

  auto* train = app.add_subcommand("train", "Run every configured mode");
  auto* simulate =
      app.add_subcommand("simulate", "Closed-form and simulated batch times");
  auto* gantt = app.add_subcommand("gantt", "Write a schedule CSV");
  std::string gantt_mode = "PPLL";
  gantt->add_option("--mode", gantt_mode, "E2E, NaivePP or PPLL")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) opts.seed = seed;

  try {
    if (*train) return Train(opts);
    if (*simulate) return Simulate(opts);
    if (*gantt) return Gantt(opts, gantt_mode);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
