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
#include "locopipe/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "locopipe/error.hpp"

namespace locopipe {

double EpochMetrics::mean_staleness() const {
  std::size_t count = 0;
  double total = 0.0;
  for (const auto& [lag, n] : staleness) {
    total += static_cast<double>(lag) * static_cast<double>(n);
    count += n;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

double Throughput(const EpochMetrics& metrics, std::size_t n_batches) {
  if (!(metrics.wall_time > 0.0)) {
    throw Error(ErrorCode::kZeroDuration, "throughput over zero duration");
  }
  return static_cast<double>(n_batches) / metrics.wall_time;
}

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void Pad(double seconds) {
  if (seconds > 0.0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
}

void ValidateModules(std::span<LocalModule> modules) {
  if (modules.empty()) {
    throw Error(ErrorCode::kConfigMismatch, "no modules to run");
  }
  for (std::size_t j = 0; j < modules.size(); ++j) {
    const LocalModule& m = modules[j];
    if (m.stage_index() != j || m.is_final() != (j + 1 == modules.size())) {
      throw Error(ErrorCode::kConfigMismatch,
                  "module " + std::to_string(j) +
                      " does not belong at this stage position");
    }
    if (j > 0 && modules[j - 1].output_width() != m.input_width()) {
      throw Error(ErrorCode::kConfigMismatch,
                  "stage " + std::to_string(j - 1) + " emits width " +
                      std::to_string(modules[j - 1].output_width()) +
                      " but stage " + std::to_string(j) + " expects " +
                      std::to_string(m.input_width()));
    }
  }
}

std::vector<PhasePadding> ResolvePadding(const RunConfig& config,
                                         std::size_t stages) {
  if (config.padding.empty()) return std::vector<PhasePadding>(stages);
  if (config.padding.size() == 1) {
    return std::vector<PhasePadding>(stages, config.padding.front());
  }
  if (config.padding.size() != stages) {
    throw Error(ErrorCode::kConfigMismatch,
                std::to_string(config.padding.size()) +
                    " padding entries for " + std::to_string(stages) +
                    " stages");
  }
  return config.padding;
}

EpochMetrics InitMetrics(RunMode mode, std::size_t stages, bool deterministic) {
  EpochMetrics m;
  m.mode = mode;
  m.deterministic = deterministic;
  m.batches_processed.assign(stages, 0);
  m.busy_time.assign(stages, 0.0);
  m.loss_trace.assign(stages, {});
  m.mean_loss.assign(stages, 0.0);
  m.visited.assign(stages, {});
  m.forward_time.assign(stages, 0.0);
  m.aux_forward_time.assign(stages, 0.0);
  return m;
}

void Finalize(EpochMetrics& m) {
  for (std::size_t j = 0; j < m.loss_trace.size(); ++j) {
    const auto& trace = m.loss_trace[j];
    m.mean_loss[j] =
        trace.empty() ? 0.0
                      : std::accumulate(trace.begin(), trace.end(), 0.0) /
                            static_cast<double>(trace.size());
    m.batches_processed[j] = m.visited[j].size();
  }
}

Tensor GradientOf(const Tensor& t) {
  if (!t.has_grad()) {
    throw Error(ErrorCode::kMissingGradient, "stage input received no gradient");
  }
  const auto g = t.grad();
  return Tensor(t.shape(), std::vector<double>(g.begin(), g.end()));
}

// First failure wins; later ones are usually fallout from the unwind.
class FailureLatch {
 public:
  void record(const std::string& where, const char* what) {
    std::lock_guard lock(mu_);
    if (!message_) message_ = where + ": " + what;
  }
  void rethrow_if_failed() {
    std::lock_guard lock(mu_);
    if (message_) throw Error(ErrorCode::kWorkerPanic, *message_);
  }

 private:
  std::mutex mu_;
  std::optional<std::string> message_;
};

// One end-to-end step: forward through every block on one tape, task loss
// at the head, one backward, block updates.
void E2EStep(std::span<LocalModule> modules, const Batch& batch,
             const std::vector<PhasePadding>* pads, EpochMetrics& m) {
  const std::size_t stages = modules.size();
  GradTape tape;
  Tensor h = batch.features;
  for (std::size_t j = 0; j < stages; ++j) {
    const auto t0 = Clock::now();
    h = modules[j].block_forward(tape, h);
    if (pads) Pad((*pads)[j].forward);
    m.forward_time[j] += Since(t0);
    m.busy_time[j] += Since(t0);
  }
  const Tensor loss = tape.softmax_xent(h, batch.labels);
  tape.backward(loss);
  for (std::size_t j = stages; j-- > 0;) {
    const auto t0 = Clock::now();
    if (pads) Pad((*pads)[j].backward);
    m.busy_time[j] += Since(t0);
  }
  for (std::size_t j = 0; j < stages; ++j) {
    const auto t0 = Clock::now();
    modules[j].apply_block_update();
    if (pads) Pad((*pads)[j].update);
    m.busy_time[j] += Since(t0);
    m.visited[j].push_back(batch.batch_id);
  }
  m.loss_trace[stages - 1].push_back(loss.item());
}

// Sequential naive pipeline step: forward chain, backward chain seeded
// stage by stage with each stage updating before it hands its input
// gradient upstream.
void NaivePPSequentialStep(std::span<LocalModule> modules, const Batch& batch,
                           EpochMetrics& m) {
  const std::size_t stages = modules.size();
  std::vector<ForwardPass> passes;
  passes.reserve(stages);
  Tensor x = batch.features;
  for (std::size_t j = 0; j < stages; ++j) {
    passes.push_back(modules[j].forward(x, j > 0));
    x = passes.back().features.detach();
  }
  Tensor upstream;
  for (std::size_t j = stages; j-- > 0;) {
    ForwardPass& pass = passes[j];
    if (j + 1 == stages) {
      const Tensor loss = pass.tape.softmax_xent(pass.features, batch.labels);
      pass.tape.backward(loss);
      m.loss_trace[j].push_back(loss.item());
    } else {
      pass.tape.backward(pass.features, upstream);
    }
    modules[j].apply_block_update();
    if (j > 0) upstream = GradientOf(pass.input);
  }
  for (std::size_t j = 0; j < stages; ++j) m.visited[j].push_back(batch.batch_id);
}

void CollectHighWater(const std::vector<std::unique_ptr<StageBuffer>>& bufs,
                      EpochMetrics& m) {
  for (const auto& b : bufs) m.buffer_high_water.push_back(b->high_water_mark());
}

EpochMetrics RunE2EThreaded(std::span<LocalModule> modules,
                            BatchIterator& batches,
                            const std::vector<PhasePadding>& pads) {
  EpochMetrics m = InitMetrics(RunMode::kE2E, modules.size(), false);
  const auto start = Clock::now();
  try {
    while (auto batch = batches.next()) E2EStep(modules, *batch, &pads, m);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kWorkerPanic, std::string("stage 0: ") + e.what());
  }
  m.wall_time = Since(start);
  Finalize(m);
  return m;
}

struct Pipeline {
  std::vector<std::unique_ptr<StageBuffer>> forward;  // [0] is the source
  std::vector<std::unique_ptr<StageBuffer>> gradient;  // stage j+1 -> j
  FailureLatch failure;

  void cancel_all() {
    for (auto& b : forward) b->cancel();
    for (auto& b : gradient) b->cancel();
  }
};

void SourceLoop(BatchIterator& batches, Pipeline& p) {
  try {
    while (auto batch = batches.next()) {
      p.forward[0]->push(
          {batch->batch_id, std::move(batch->features), std::move(batch->labels)});
    }
    p.forward[0]->close();
  } catch (const std::exception& e) {
    p.failure.record("source", e.what());
    p.cancel_all();
  }
}

void PpllWorker(std::size_t j, LocalModule& module, Pipeline& p,
                const PhasePadding& pad, double comm,
                std::map<std::int64_t, std::size_t>& staleness,
                EpochMetrics& m) {
  StageBuffer& in = *p.forward[j];
  StageBuffer* out = module.is_final() ? nullptr : p.forward[j + 1].get();
  try {
    while (auto popped = in.pop()) {
      BufferSlot& slot = popped->slot;
      if (j > 0) ++staleness[popped->staleness];
      auto t0 = Clock::now();
      ForwardPass pass = module.forward(slot.features);
      Pad(pad.forward);
      m.forward_time[j] += Since(t0);
      if (out) {
        out->note_produced(slot.batch_id);
        Pad(comm);
        m.busy_time[j] += Since(t0);
        out->push({slot.batch_id, pass.features.detach(), slot.labels});
        t0 = Clock::now();
      }
      LocalTimings timings;
      const double loss = module.local_backward(pass, slot.labels, &timings);
      m.aux_forward_time[j] += timings.aux_forward;
      Pad(pad.backward);
      module.apply_local_update();
      Pad(pad.update);
      m.busy_time[j] += Since(t0);
      m.loss_trace[j].push_back(loss);
      m.visited[j].push_back(slot.batch_id);
    }
    if (out) out->close();
  } catch (const std::exception& e) {
    p.failure.record("stage " + std::to_string(j), e.what());
    p.cancel_all();
  }
}

void NaivePPWorker(std::size_t j, LocalModule& module, Pipeline& p,
                   const PhasePadding& pad, double comm,
                   std::map<std::int64_t, std::size_t>& staleness,
                   EpochMetrics& m) {
  StageBuffer& in = *p.forward[j];
  StageBuffer* out = module.is_final() ? nullptr : p.forward[j + 1].get();
  StageBuffer* grad_in = module.is_final() ? nullptr : p.gradient[j].get();
  StageBuffer* grad_out = j > 0 ? p.gradient[j - 1].get() : nullptr;
  try {
    while (auto popped = in.pop()) {
      BufferSlot& slot = popped->slot;
      if (j > 0) ++staleness[popped->staleness];
      auto t0 = Clock::now();
      ForwardPass pass = module.forward(slot.features, j > 0);
      Pad(pad.forward);
      m.forward_time[j] += Since(t0);
      if (out) {
        out->note_produced(slot.batch_id);
        Pad(comm);
        m.busy_time[j] += Since(t0);
        out->push({slot.batch_id, pass.features.detach(), slot.labels});
        auto grad = grad_in->pop();
        if (!grad) return;  // unwinding after a failure elsewhere
        if (grad->slot.batch_id != slot.batch_id) {
          throw Error(ErrorCode::kConfigMismatch,
                      "gradient for batch " +
                          std::to_string(grad->slot.batch_id) +
                          " arrived while holding batch " +
                          std::to_string(slot.batch_id));
        }
        t0 = Clock::now();
        pass.tape.backward(pass.features, grad->slot.features);
      } else {
        const Tensor loss = pass.tape.softmax_xent(pass.features, slot.labels);
        pass.tape.backward(loss);
        m.loss_trace[j].push_back(loss.item());
      }
      Pad(pad.backward);
      module.apply_block_update();
      Pad(pad.update);
      if (grad_out) {
        Tensor g = GradientOf(pass.input);
        Pad(comm);
        m.busy_time[j] += Since(t0);
        grad_out->push({slot.batch_id, std::move(g), slot.labels});
      } else {
        m.busy_time[j] += Since(t0);
      }
      m.visited[j].push_back(slot.batch_id);
    }
    if (out) out->close();
    if (grad_out) grad_out->close();
  } catch (const std::exception& e) {
    p.failure.record("stage " + std::to_string(j), e.what());
    p.cancel_all();
  }
}

EpochMetrics RunPipelined(RunMode mode, std::span<LocalModule> modules,
                          BatchIterator& batches, const RunConfig& config,
                          const std::vector<PhasePadding>& pads) {
  const std::size_t stages = modules.size();
  EpochMetrics m = InitMetrics(mode, stages, false);
  Pipeline p;
  for (std::size_t j = 0; j < stages; ++j) {
    p.forward.push_back(std::make_unique<StageBuffer>(config.buffer_capacity));
  }
  if (mode == RunMode::kNaivePP) {
    for (std::size_t j = 0; j + 1 < stages; ++j) {
      p.gradient.push_back(std::make_unique<StageBuffer>(1));
    }
  }
  std::vector<std::map<std::int64_t, std::size_t>> staleness(stages);

  const auto start = Clock::now();
  {
    std::vector<std::jthread> threads;
    threads.emplace_back([&] { SourceLoop(batches, p); });
    for (std::size_t j = 0; j < stages; ++j) {
      threads.emplace_back([&, j] {
        if (mode == RunMode::kPPLL) {
          PpllWorker(j, modules[j], p, pads[j], config.comm_padding,
                     staleness[j], m);
        } else {
          NaivePPWorker(j, modules[j], p, pads[j], config.comm_padding,
                        staleness[j], m);
        }
      });
    }
  }
  m.wall_time = Since(start);
  p.failure.rethrow_if_failed();

  for (const auto& per_stage : staleness) {
    for (const auto& [lag, n] : per_stage) m.staleness[lag] += n;
  }
  CollectHighWater(p.forward, m);
  Finalize(m);
  return m;
}

}  // namespace

EpochMetrics RunEpoch(RunMode mode, std::span<LocalModule> modules,
                      BatchIterator& batches, const RunConfig& config) {
  ValidateModules(modules);
  const auto pads = ResolvePadding(config, modules.size());
  switch (mode) {
    case RunMode::kE2E:
      return RunE2EThreaded(modules, batches, pads);
    case RunMode::kNaivePP:
    case RunMode::kPPLL:
      return RunPipelined(mode, modules, batches, config, pads);
  }
  throw Error(ErrorCode::kInvalidMode, "unknown run mode");
}

EpochMetrics RunDeterministic(RunMode mode, std::span<LocalModule> modules,
                              BatchIterator& batches, const RunConfig& config) {
  ValidateModules(modules);
  if (config.buffer_capacity < 1) {
    throw Error(ErrorCode::kInvalidArg, "buffer capacity must be >= 1");
  }
  const std::size_t stages = modules.size();
  EpochMetrics m = InitMetrics(mode, stages, true);

  if (mode == RunMode::kE2E || mode == RunMode::kNaivePP) {
    std::size_t n = 0;
    while (auto batch = batches.next()) {
      if (mode == RunMode::kE2E) {
        E2EStep(modules, *batch, nullptr, m);
      } else {
        NaivePPSequentialStep(modules, *batch, m);
      }
      ++n;
    }
    m.wall_time = static_cast<double>(n * stages);
    m.buffer_high_water.assign(stages, n ? 1 : 0);
    Finalize(m);
    return m;
  }
  if (mode != RunMode::kPPLL) {
    throw Error(ErrorCode::kInvalidMode, "unknown run mode");
  }

  // queues[j] feeds stage j; queues[0] is filled from the batch stream on
  // demand. Each queued slot carries the logical time it became available,
  // so wall_time is the unit-cost pipelined makespan of this schedule.
  struct Queued {
    BufferSlot slot;
    double ready = 0.0;
  };
  const std::size_t cap = config.buffer_capacity;
  std::vector<std::deque<Queued>> queues(stages);
  std::vector<std::int64_t> produced(stages, -1);
  std::vector<double> stage_clock(stages, 0.0);
  std::vector<std::size_t> high_water(stages, 0);
  bool source_done = false;
  for (;;) {
    if (!source_done && queues[0].size() < cap) {
      if (auto batch = batches.next()) {
        queues[0].push_back({{batch->batch_id, std::move(batch->features),
                              std::move(batch->labels)},
                             0.0});
        high_water[0] = std::max(high_water[0], queues[0].size());
      } else {
        source_done = true;
      }
    }
    for (std::size_t j = 0; j < stages; ++j) {
      const bool has_output = j + 1 < stages;
      if (queues[j].empty()) continue;
      if (has_output && queues[j + 1].size() >= cap) continue;
      Queued item = std::move(queues[j].front());
      queues[j].pop_front();
      BufferSlot& slot = item.slot;
      if (j > 0) {
        ++m.staleness[std::max(produced[j - 1], slot.batch_id) - slot.batch_id];
      }
      stage_clock[j] = std::max(stage_clock[j], item.ready) + 1.0;
      ForwardPass pass = modules[j].forward(slot.features);
      produced[j] = slot.batch_id;
      if (has_output) {
        queues[j + 1].push_back(
            {{slot.batch_id, pass.features.detach(), slot.labels},
             stage_clock[j]});
        high_water[j + 1] = std::max(high_water[j + 1], queues[j + 1].size());
      }
      m.loss_trace[j].push_back(modules[j].local_backward(pass, slot.labels));
      modules[j].apply_local_update();
      m.visited[j].push_back(slot.batch_id);
    }
    const bool drained = std::all_of(queues.begin(), queues.end(),
                                     [](const auto& q) { return q.empty(); });
    if (source_done && drained) break;
  }
  m.wall_time = *std::max_element(stage_clock.begin(), stage_clock.end());
  m.buffer_high_water = high_water;
  Finalize(m);
  return m;
}

}  // namespace locopipe
