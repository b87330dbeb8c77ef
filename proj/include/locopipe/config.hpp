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
#ifndef LOCOPIPE_CONFIG_HPP_
#define LOCOPIPE_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "locopipe/run_mode.hpp"

namespace locopipe {

enum class DatasetKind { kBlobs, kSpirals, kIdx };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSpirals;
  std::size_t n_per_class = 100;
  std::size_t test_n_per_class = 100;
  int classes = 2;
  std::size_t dim = 2;
  double spread = 0.5;
  double noise = 0.0;
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;

  bool operator==(const DatasetConfig&) const = default;
};

// Flat key = value experiment description; `#` starts a comment.
struct ExperimentConfig {
  DatasetConfig dataset;
  std::vector<std::size_t> layer_dims;
  std::size_t stages = 1;
  std::size_t buffer_capacity = 2;
  int aux_max_depth = 2;
  int aux_period = 3;
  std::size_t aux_hidden_width = 0;
  std::size_t batch_size = 16;
  std::size_t epochs = 1;
  double lr0 = 0.01;
  double lr_min = 0.0;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t seed = 42;
  std::vector<RunMode> modes = {RunMode::kE2E, RunMode::kNaivePP,
                                RunMode::kPPLL};
  bool shuffle = true;
  bool deterministic = false;
  // Seconds of sleep per phase; one value for all stages or one per stage.
  std::vector<double> sleep_forward;
  std::vector<double> sleep_backward;
  std::vector<double> sleep_update;
  double sleep_comm = 0.0;
  // Cost-model profile for `simulate` and `gantt`; one entry per stage.
  std::vector<double> profile_f;
  std::vector<double> profile_b;
  std::vector<double> profile_u;
  std::vector<double> profile_f_a;
  std::vector<double> profile_b_a;
  std::vector<double> profile_u_a;
  double profile_q = 0.0;
  std::size_t sim_batches = 16;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws kParseError (with line number), kUnknownKey or kInvalidValue.
ExperimentConfig ParseConfigText(std::string_view text);
ExperimentConfig ParseConfig(const std::filesystem::path& path);
// Every key, one per line, in a form ParseConfigText reads back unchanged.
std::string SerializeConfig(const ExperimentConfig& cfg);

std::string_view DatasetKindName(DatasetKind kind);

}  // namespace locopipe

#endif  // LOCOPIPE_CONFIG_HPP_
