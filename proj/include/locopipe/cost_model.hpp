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
#ifndef LOCOPIPE_COST_MODEL_HPP_
#define LOCOPIPE_COST_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locopipe/run_mode.hpp"

namespace locopipe {

// Per-stage costs in abstract time units: forward, backward and update of
// the stage's block, then the same three for its auxiliary network.
struct StageProfile {
  double f = 0.0;
  double b = 0.0;
  double u = 0.0;
  double f_a = 0.0;
  double b_a = 0.0;
  double u_a = 0.0;
};

// Q(s): per-batch communication overhead. E2E ignores it. The simulator
// charges it once per batch after the forward chain for NaivePP, and once
// per batch on every stage, right after its forward, for PPLL.
struct CommModel {
  double q_total = 0.0;
};

struct CostComponents {
  double F = 0.0;     // sum of block forwards
  double B = 0.0;     // sum of block backwards
  double U = 0.0;     // sum of block updates
  double Q = 0.0;
  double F_a1 = 0.0;  // stage-1 block + aux forward
  double B_a1 = 0.0;  // stage-1 block + aux backward
  double U_a1 = 0.0;  // stage-1 block + aux update
};

struct CostEstimate {
  RunMode mode = RunMode::kE2E;
  double batch_time = 0.0;
  CostComponents components;
};

// F + B + U.
CostEstimate EstimateE2E(std::span<const StageProfile> profiles);
// F + B + U + Q.
CostEstimate EstimatePP(std::span<const StageProfile> profiles,
                        const CommModel& comm);
// F_a1 + B_a1 + U_a1 + Q, i.e. the first stage's full local cycle.
CostEstimate EstimatePPLL(std::span<const StageProfile> profiles,
                          const CommModel& comm);
CostEstimate Estimate(RunMode mode, std::span<const StageProfile> profiles,
                      const CommModel& comm);

// PPLL-to-PP batch-time ratio for uniform stages whose first auxiliary
// network costs k times the first block: (k + 1) / s.
double RatioIdeal(double k, int s);

// Margins whose sum is t_pp - t_ppll; all three positive implies PPLL wins.
struct BeatsWitness {
  bool beats = false;
  double backward_margin = 0.0;  // B - B_a1
  double update_margin = 0.0;    // U - U_a1
  double forward_margin = 0.0;   // sum_{i>=2} f_i - f_a1
  double t_pp = 0.0;
  double t_ppll = 0.0;
};
BeatsWitness PpllBeatsPp(std::span<const StageProfile> profiles,
                         const CommModel& comm);

// Length of one stage's PPLL cycle, including the per-batch Q.
double PpllStageCycle(const StageProfile& p, const CommModel& comm);

enum class EventKind { kForward, kAuxForward, kBackward, kUpdate, kComm };
std::string_view EventKindName(EventKind kind);

struct ScheduleEvent {
  std::size_t stage = 0;
  EventKind kind = EventKind::kForward;
  std::int64_t batch_id = 0;
  double start = 0.0;
  double end = 0.0;
};

struct ScheduleResult {
  std::vector<ScheduleEvent> events;
  // finish(n) - finish(n - 1), where finish(t) is the time batch t has
  // completed on every stage. For n = 1 it is the makespan.
  double steady_batch_time = 0.0;
  double makespan = 0.0;
};

// Discrete-event timeline of `n_batches` under the dependency rules of
// `mode`:
//   E2E      one serial chain: forwards, backwards in reverse, updates.
//   NaivePP  forward chain, Q, then backward chain where each stage
//            updates before handing its gradient upstream; the next batch
//            starts after stage 1's update.
//   PPLL     stage j starts batch t once stage j-1 has pushed it and stage j
//            finished batch t-1; a push into buffer j waits until stage j+1
//            has popped batch t - capacity.
ScheduleResult SimulateSchedule(std::span<const StageProfile> profiles,
                                const CommModel& comm, RunMode mode,
                                std::size_t n_batches,
                                std::size_t buffer_capacity = 2);

// CSV with header stage,kind,batch_id,start,end and one row per event,
// sorted by (start, stage); times use six decimals.
std::string RenderGanttCsv(std::span<const ScheduleEvent> events);

}  // namespace locopipe

#endif  // LOCOPIPE_COST_MODEL_HPP_
