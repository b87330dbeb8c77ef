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
#include "locopipe/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "locopipe/error.hpp"

namespace locopipe {

namespace {

void Validate(std::span<const StageProfile> profiles, const CommModel& comm) {
  if (profiles.empty()) {
    throw Error(ErrorCode::kEmptyProfiles, "no stage profiles");
  }
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  for (const StageProfile& p : profiles) {
    if (!ok(p.f) || !ok(p.b) || !ok(p.u) || !ok(p.f_a) || !ok(p.b_a) ||
        !ok(p.u_a)) {
      throw Error(ErrorCode::kInvalidArg,
                  "stage costs must be finite and non-negative");
    }
  }
  if (!ok(comm.q_total)) {
    throw Error(ErrorCode::kInvalidArg, "Q must be finite and non-negative");
  }
}

CostComponents Components(std::span<const StageProfile> profiles,
                          const CommModel& comm) {
  CostComponents c;
  for (const StageProfile& p : profiles) c.F += p.f;
  for (const StageProfile& p : profiles) c.B += p.b;
  for (const StageProfile& p : profiles) c.U += p.u;
  c.Q = comm.q_total;
  const StageProfile& first = profiles.front();
  c.F_a1 = first.f + first.f_a;
  c.B_a1 = first.b + first.b_a;
  c.U_a1 = first.u + first.u_a;
  return c;
}

}  // namespace

CostEstimate EstimateE2E(std::span<const StageProfile> profiles) {
  Validate(profiles, CommModel{});
  CostEstimate est;
  est.mode = RunMode::kE2E;
  est.components = Components(profiles, CommModel{});
  const CostComponents& c = est.components;
  est.batch_time = c.F + c.B + c.U;
  return est;
}

CostEstimate EstimatePP(std::span<const StageProfile> profiles,
                        const CommModel& comm) {
  Validate(profiles, comm);
  CostEstimate est;
  est.mode = RunMode::kNaivePP;
  est.components = Components(profiles, comm);
  const CostComponents& c = est.components;
  est.batch_time = c.F + c.B + c.U + c.Q;
  return est;
}

CostEstimate EstimatePPLL(std::span<const StageProfile> profiles,
                          const CommModel& comm) {
  Validate(profiles, comm);
  CostEstimate est;
  est.mode = RunMode::kPPLL;
  est.components = Components(profiles, comm);
  const CostComponents& c = est.components;
  est.batch_time = c.F_a1 + c.B_a1 + c.U_a1 + c.Q;
  return est;
}

CostEstimate Estimate(RunMode mode, std::span<const StageProfile> profiles,
                      const CommModel& comm) {
  switch (mode) {
    case RunMode::kE2E: return EstimateE2E(profiles);
    case RunMode::kNaivePP: return EstimatePP(profiles, comm);
    case RunMode::kPPLL: return EstimatePPLL(profiles, comm);
  }
  throw Error(ErrorCode::kInvalidMode, "unknown run mode");
}

double RatioIdeal(double k, int s) {
  if (!(k >= 0.0) || s < 1) {
    throw Error(ErrorCode::kInvalidArg, "ratio needs k >= 0 and s >= 1");
  }
  return (k + 1.0) / static_cast<double>(s);
}

BeatsWitness PpllBeatsPp(std::span<const StageProfile> profiles,
                         const CommModel& comm) {
  const CostEstimate pp = EstimatePP(profiles, comm);
  const CostEstimate ppll = EstimatePPLL(profiles, comm);
  const CostComponents& c = pp.components;
  double tail_forward = 0.0;
  for (std::size_t i = 1; i < profiles.size(); ++i) tail_forward += profiles[i].f;
  BeatsWitness w;
  w.backward_margin = c.B - c.B_a1;
  w.update_margin = c.U - c.U_a1;
  w.forward_margin = tail_forward - profiles.front().f_a;
  w.t_pp = pp.batch_time;
  w.t_ppll = ppll.batch_time;
  w.beats = w.t_ppll < w.t_pp;
  return w;
}

double PpllStageCycle(const StageProfile& p, const CommModel& comm) {
  return p.f + comm.q_total + p.f_a + (p.b + p.b_a) + (p.u + p.u_a);
}

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kForward: return "forward";
    case EventKind::kAuxForward: return "aux_forward";
    case EventKind::kBackward: return "backward";
    case EventKind::kUpdate: return "update";
    case EventKind::kComm: return "comm";
  }
  return "?";
}

namespace {

class Timeline {
 public:
  explicit Timeline(std::vector<ScheduleEvent>& events) : events_(events) {}

  // Appends [start, start + duration) and returns its end.
  double add(std::size_t stage, EventKind kind, std::int64_t batch,
             double start, double duration) {
    const double end = start + duration;
    events_.push_back({stage, kind, batch, start, end});
    return end;
  }

 private:
  std::vector<ScheduleEvent>& events_;
};

double SteadyFrom(const std::vector<double>& finish) {
  if (finish.size() == 1) return finish.front();
  return finish[finish.size() - 1] - finish[finish.size() - 2];
}

ScheduleResult SimulateE2E(std::span<const StageProfile> profiles,
                           std::size_t n_batches) {
  ScheduleResult r;
  Timeline tl(r.events);
  const std::size_t s = profiles.size();
  std::vector<double> finish(n_batches);
  double t = 0.0;
  for (std::size_t n = 0; n < n_batches; ++n) {
    const auto id = static_cast<std::int64_t>(n);
    for (std::size_t j = 0; j < s; ++j)
      t = tl.add(j, EventKind::kForward, id, t, profiles[j].f);
    for (std::size_t j = s; j-- > 0;)
      t = tl.add(j, EventKind::kBackward, id, t, profiles[j].b);
    for (std::size_t j = 0; j < s; ++j)
      t = tl.add(j, EventKind::kUpdate, id, t, profiles[j].u);
    finish[n] = t;
  }
  r.steady_batch_time = SteadyFrom(finish);
  r.makespan = t;
  return r;
}

ScheduleResult SimulateNaivePP(std::span<const StageProfile> profiles,
                               const CommModel& comm, std::size_t n_batches) {
  ScheduleResult r;
  Timeline tl(r.events);
  const std::size_t s = profiles.size();
  std::vector<double> finish(n_batches);
  double t = 0.0;
  for (std::size_t n = 0; n < n_batches; ++n) {
    const auto id = static_cast<std::int64_t>(n);
    for (std::size_t j = 0; j < s; ++j)
      t = tl.add(j, EventKind::kForward, id, t, profiles[j].f);
    t = tl.add(s - 1, EventKind::kComm, id, t, comm.q_total);
    for (std::size_t j = s; j-- > 0;) {
      t = tl.add(j, EventKind::kBackward, id, t, profiles[j].b);
      t = tl.add(j, EventKind::kUpdate, id, t, profiles[j].u);
    }
    finish[n] = t;
  }
  r.steady_batch_time = SteadyFrom(finish);
  r.makespan = t;
  return r;
}

ScheduleResult SimulatePPLL(std::span<const StageProfile> profiles,
                            const CommModel& comm, std::size_t n_batches,
                            std::size_t capacity) {
  ScheduleResult r;
  Timeline tl(r.events);
  const std::size_t s = profiles.size();
  // [stage][batch]
  std::vector<std::vector<double>> start(s, std::vector<double>(n_batches));
  std::vector<std::vector<double>> pushed(s, std::vector<double>(n_batches));
  std::vector<double> stage_free(s, 0.0);
  std::vector<double> finish(n_batches, 0.0);
  for (std::size_t n = 0; n < n_batches; ++n) {
    const auto id = static_cast<std::int64_t>(n);
    for (std::size_t j = 0; j < s; ++j) {
      const StageProfile& p = profiles[j];
      const double available = j == 0 ? 0.0 : pushed[j - 1][n];
      const double t0 = std::max(available, stage_free[j]);
      start[j][n] = t0;
      double t = tl.add(j, EventKind::kForward, id, t0, p.f);
      t = tl.add(j, EventKind::kComm, id, t, comm.q_total);
      // Blocked until the consumer has popped batch n - capacity.
      if (j + 1 < s && n >= capacity) {
        t = std::max(t, start[j + 1][n - capacity]);
      }
      pushed[j][n] = t;
      t = tl.add(j, EventKind::kAuxForward, id, t, p.f_a);
      t = tl.add(j, EventKind::kBackward, id, t, p.b + p.b_a);
      t = tl.add(j, EventKind::kUpdate, id, t, p.u + p.u_a);
      stage_free[j] = t;
      finish[n] = std::max(finish[n], t);
    }
  }
  r.steady_batch_time = SteadyFrom(finish);
  r.makespan = *std::max_element(stage_free.begin(), stage_free.end());
  return r;
}

}  // namespace

ScheduleResult SimulateSchedule(std::span<const StageProfile> profiles,
                                const CommModel& comm, RunMode mode,
                                std::size_t n_batches,
                                std::size_t buffer_capacity) {
  Validate(profiles, comm);
  if (n_batches < 1) {
    throw Error(ErrorCode::kInvalidArg, "simulate at least one batch");
  }
  if (buffer_capacity < 1) {
    throw Error(ErrorCode::kInvalidArg, "buffer capacity must be >= 1");
  }
  switch (mode) {
    case RunMode::kE2E: return SimulateE2E(profiles, n_batches);
    case RunMode::kNaivePP: return SimulateNaivePP(profiles, comm, n_batches);
    case RunMode::kPPLL:
      return SimulatePPLL(profiles, comm, n_batches, buffer_capacity);
  }
  throw Error(ErrorCode::kInvalidMode, "unknown run mode");
}

std::string RenderGanttCsv(std::span<const ScheduleEvent> events) {
  if (events.empty()) {
    throw Error(ErrorCode::kEmptyEvents, "no events to render");
  }
  std::vector<ScheduleEvent> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScheduleEvent& a, const ScheduleEvent& b) {
                     if (a.start != b.start) return a.start < b.start;
                     return a.stage < b.stage;
                   });
  std::string out = "stage,kind,batch_id,start,end\n";
  char line[160];
  for (const ScheduleEvent& e : sorted) {
    std::snprintf(line, sizeof(line), "%zu,%s,%lld,%.6f,%.6f\n", e.stage,
                  std::string(EventKindName(e.kind)).c_str(),
                  static_cast<long long>(e.batch_id), e.start, e.end);
    out += line;
  }
  return out;
}

}  // namespace locopipe
