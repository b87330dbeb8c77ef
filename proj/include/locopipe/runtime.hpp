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
#ifndef LOCOPIPE_RUNTIME_HPP_
#define LOCOPIPE_RUNTIME_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "locopipe/buffer.hpp"
#include "locopipe/data.hpp"
#include "locopipe/model.hpp"
#include "locopipe/run_mode.hpp"

namespace locopipe {

// Sleep inserted after each phase of a stage, in seconds. Emulates heavier
// per-stage compute.
struct PhasePadding {
  double forward = 0.0;
  double backward = 0.0;
  double update = 0.0;
};

struct RunConfig {
  std::size_t buffer_capacity = 2;
  // Empty: no padding. One entry: applied to every stage. Otherwise one
  // entry per stage.
  std::vector<PhasePadding> padding;
  // Sleep per inter-stage transfer, in seconds.
  double comm_padding = 0.0;
};

struct EpochMetrics {
  RunMode mode = RunMode::kPPLL;
  bool deterministic = false;
  // Seconds for threaded runs; logical stage-steps for deterministic runs.
  double wall_time = 0.0;
  std::vector<std::size_t> batches_processed;
  std::vector<double> busy_time;
  // Local loss per processed batch. Only the final stage has losses in E2E
  // and NaivePP.
  std::vector<std::vector<double>> loss_trace;
  std::vector<double> mean_loss;
  // Batch ids in the order each stage processed them.
  std::vector<std::vector<std::int64_t>> visited;
  // Producer-minus-consumer batch index seen at each inter-stage pop.
  std::map<std::int64_t, std::size_t> staleness;
  // Highest occupancy reached by each buffer (source buffer first).
  std::vector<std::size_t> buffer_high_water;
  // Summed seconds per stage: block forward (including forward padding)
  // and aux forward.
  std::vector<double> forward_time;
  std::vector<double> aux_forward_time;

  double mean_staleness() const;
};

// Threaded epoch: one worker per stage plus a source feeding stage 0.
// Failures in any worker unwind all buffers and surface as kWorkerPanic
// naming the stage.
EpochMetrics RunEpoch(RunMode mode, std::span<LocalModule> modules,
                      BatchIterator& batches, const RunConfig& config);

// Single-threaded equivalent. PPLL steps stages 0..S-1 round-robin with
// capacity-M queues; a stage steps when it has input and output space.
// Padding is ignored and wall_time is logical: every stage step costs one
// unit, serial for E2E and NaivePP (S units per batch) and overlapped
// across stages for PPLL (N + S - 1 units for N batches).
EpochMetrics RunDeterministic(RunMode mode, std::span<LocalModule> modules,
                              BatchIterator& batches, const RunConfig& config);

// Batches per second (per logical step for deterministic metrics).
double Throughput(const EpochMetrics& metrics, std::size_t n_batches);

}  // namespace locopipe

#endif  // LOCOPIPE_RUNTIME_HPP_
