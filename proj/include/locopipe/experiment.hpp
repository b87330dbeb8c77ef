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
#ifndef LOCOPIPE_EXPERIMENT_HPP_
#define LOCOPIPE_EXPERIMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "locopipe/config.hpp"
#include "locopipe/cost_model.hpp"
#include "locopipe/data.hpp"
#include "locopipe/model.hpp"
#include "locopipe/run_mode.hpp"
#include "locopipe/runtime.hpp"

namespace locopipe {

struct MetricsRecord {
  RunMode mode = RunMode::kE2E;
  std::size_t epoch = 1;  // 1-based
  double batches_per_sec = 0.0;
  std::vector<double> stage_mean_loss;
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::vector<MemoryProxy> stage_memory;
  double mean_staleness = 0.0;

  // Mean loss of the final stage, which owns the task head.
  double mean_loss() const;
  std::size_t params_max_stage() const;
  std::size_t activations_max_stage() const;
};

struct ModeSummary {
  RunMode mode = RunMode::kE2E;
  double batches_per_sec = 0.0;
  double test_acc = 0.0;
  std::size_t params_max_stage = 0;
  std::size_t activations_max_stage = 0;
};

struct ComparisonReport {
  std::vector<ModeSummary> modes;  // in config order
  std::size_t stages = 1;
  double k = 0.0;            // stage-0 aux forward relative to block forward
  double ratio_ideal = 1.0;  // (k + 1) / s
  std::optional<double> ppll_over_pp;
};

struct ExperimentResult {
  std::vector<MetricsRecord> records;
  ComparisonReport report;
};

struct ExperimentData {
  Dataset train;
  Dataset test;
};

// Synthetic sets draw the test split from seed + 1.
ExperimentData LoadExperimentData(const ExperimentConfig& cfg);

RunConfig MakeRunConfig(const ExperimentConfig& cfg);
ModelHyper MakeModelHyper(const ExperimentConfig& cfg,
                          std::size_t batches_per_epoch);

// Fraction of rows whose final-stage argmax equals the label.
double Accuracy(std::span<const LocalModule> modules, const Dataset& ds);

// `on_record` sees every record as soon as its epoch finishes, so a caller
// can keep partial results if a later epoch throws.
ExperimentResult RunExperiment(
    const ExperimentConfig& cfg,
    const std::function<void(const MetricsRecord&)>& on_record = {});

// Records are emitted sorted by (mode, epoch). Throws kInvalidArg for an
// empty set, kIoError if the file cannot be written.
std::string MetricsCsv(std::span<const MetricsRecord> records);
void WriteMetricsCsv(std::span<const MetricsRecord> records,
                     const std::filesystem::path& path);

std::string ReportTable(const ComparisonReport& report);

// Per-stage cost profiles from the profile_* keys. A list of one value is
// broadcast to every stage.
std::vector<StageProfile> ConfigProfiles(const ExperimentConfig& cfg);

}  // namespace locopipe

#endif  // LOCOPIPE_EXPERIMENT_HPP_
