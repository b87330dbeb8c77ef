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
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "locopipe/cost_model.hpp"
#include "locopipe/error.hpp"

namespace locopipe {
namespace {

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIoError;
}

std::vector<StageProfile> Uniform(std::size_t s, double f = 1, double b = 1,
                                  double u = 1) {
  return std::vector<StageProfile>(s, StageProfile{f, b, u, 0, 0, 0});
}

std::vector<StageProfile> WithStageOneAux(std::size_t s, double fa, double ba,
                                          double ua) {
  auto p = Uniform(s);
  p[0].f_a = fa;
  p[0].b_a = ba;
  p[0].u_a = ua;
  return p;
}

std::vector<StageProfile> RandomProfiles(std::mt19937_64& rng, std::size_t s) {
  std::uniform_real_distribution<double> d(0.0, 2.0);
  std::vector<StageProfile> out(s);
  for (auto& p : out) p = {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
  return out;
}

void ExpectNoOverlap(const ScheduleResult& r) {
  std::map<std::size_t, std::vector<std::pair<double, double>>> by_stage;
  for (const auto& e : r.events) {
    EXPECT_GE(e.end, e.start);
    by_stage[e.stage].push_back({e.start, e.end});
  }
  for (auto& [stage, spans] : by_stage) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      EXPECT_LE(spans[i - 1].second, spans[i].first) << "stage " << stage;
    }
  }
}

TEST(EstimateTest, EndToEnd) {
  EXPECT_EQ(EstimateE2E(Uniform(4)).batch_time, 12.0);
  const std::vector<StageProfile> one = {{2, 3, 1, 9, 9, 9}};
  const auto est = EstimateE2E(one);
  EXPECT_EQ(est.batch_time, 6.0);
  EXPECT_EQ(est.components.F, 2.0);
  EXPECT_EQ(est.components.B, 3.0);
  EXPECT_EQ(est.components.U, 1.0);
  EXPECT_EQ(CodeOf([] { EstimateE2E({}); }), ErrorCode::kEmptyProfiles);
}

TEST(EstimateTest, NaivePipeline) {
  EXPECT_EQ(EstimatePP(Uniform(4), CommModel{2}).batch_time, 14.0);
  EXPECT_EQ(EstimatePP(Uniform(4), CommModel{0}).batch_time,
            EstimateE2E(Uniform(4)).batch_time);
  EXPECT_EQ(EstimatePP(Uniform(1), CommModel{5}).batch_time, 8.0);
  EXPECT_EQ(CodeOf([] { EstimatePP({}, CommModel{}); }), ErrorCode::kEmptyProfiles);
}

TEST(EstimateTest, LocalLearningPipeline) {
  const auto est = EstimatePPLL(WithStageOneAux(4, 1, 1, 1), CommModel{0});
  EXPECT_EQ(est.batch_time, 6.0);
  EXPECT_EQ(est.components.F_a1, 2.0);
  EXPECT_EQ(est.components.B_a1, 2.0);
  EXPECT_EQ(est.components.U_a1, 2.0);
  EXPECT_EQ(EstimatePPLL(Uniform(4), CommModel{0}).batch_time, 3.0);
  EXPECT_EQ(est.batch_time / EstimateE2E(WithStageOneAux(4, 1, 1, 1)).batch_time,
            RatioIdeal(1, 4));
}

TEST(EstimateTest, BatchTimeIsSumOfComponents) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = RandomProfiles(rng, 1 + rng() % 8);
    const CommModel q{0.5};
    const auto e = EstimateE2E(p);
    const auto& c = e.components;
    EXPECT_EQ(e.batch_time, c.F + c.B + c.U);
    const auto pp = EstimatePP(p, q);
    EXPECT_EQ(pp.batch_time, c.F + c.B + c.U + q.q_total);
    const auto ppll = EstimatePPLL(p, q);
    const auto& d = ppll.components;
    EXPECT_EQ(ppll.batch_time, d.F_a1 + d.B_a1 + d.U_a1 + d.Q);
  }
}

TEST(EstimateTest, RejectsInvalidProfiles) {
  std::vector<StageProfile> neg = {{1, -1, 1, 0, 0, 0}};
  EXPECT_EQ(CodeOf([&] { EstimateE2E(neg); }), ErrorCode::kInvalidArg);
  std::vector<StageProfile> nan = {{std::nan(""), 1, 1, 0, 0, 0}};
  EXPECT_EQ(CodeOf([&] { EstimateE2E(nan); }), ErrorCode::kInvalidArg);
  EXPECT_EQ(CodeOf([] { EstimatePP(Uniform(2), CommModel{-1}); }),
            ErrorCode::kInvalidArg);
  EXPECT_EQ(CodeOf([] { Estimate(static_cast<RunMode>(9), Uniform(2), {}); }),
            ErrorCode::kInvalidMode);
}

TEST(EstimateTest, PpllNonIncreasingInStageCount) {
  for (double k : {0.0, 0.5, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t s = 1; s <= 8; ++s) {
      const double per = 24.0 / static_cast<double>(s);
      auto p = Uniform(s, per, per, per);
      p[0].f_a = k * per;
      p[0].b_a = k * per;
      p[0].u_a = k * per;
      const double t = EstimatePPLL(p, CommModel{0}).batch_time;
      EXPECT_LE(t, prev);
      prev = t;
    }
  }
}

TEST(RatioIdealTest, Substitutions) {
  EXPECT_EQ(RatioIdeal(1, 2), 1.0);
  EXPECT_EQ(RatioIdeal(0, 1), 1.0);
  EXPECT_EQ(RatioIdeal(3, 4), 1.0);
  EXPECT_EQ(RatioIdeal(0, 4), 0.25);
  EXPECT_EQ(CodeOf([] { RatioIdeal(-1, 2); }), ErrorCode::kInvalidArg);
  EXPECT_EQ(CodeOf([] { RatioIdeal(1, 0); }), ErrorCode::kInvalidArg);
}

TEST(BeatsTest, UniformWithStageSizedAux) {
  const auto w = PpllBeatsPp(WithStageOneAux(4, 1, 1, 1), CommModel{0});
  EXPECT_TRUE(w.beats);
  EXPECT_EQ(w.backward_margin, 2.0);
  EXPECT_EQ(w.update_margin, 2.0);
  EXPECT_EQ(w.forward_margin, 2.0);
}

TEST(BeatsTest, SingleStageNeverWins) {
  for (double aux : {0.1, 1.0, 5.0}) {
    auto p = Uniform(1);
    p[0].f_a = aux;
    EXPECT_FALSE(PpllBeatsPp(p, CommModel{1}).beats);
  }
}

TEST(BeatsTest, TwoStagesWithoutAux) {
  EXPECT_TRUE(PpllBeatsPp(Uniform(2), CommModel{0}).beats);
}

TEST(BeatsTest, MarginsExplainTheVerdict) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto p = RandomProfiles(rng, 1 + rng() % 8);
    const auto w = PpllBeatsPp(p, CommModel{0.3});
    const double total = w.backward_margin + w.update_margin + w.forward_margin;
    if (w.backward_margin > 0 && w.update_margin > 0 && w.forward_margin > 0) {
      EXPECT_TRUE(w.beats);
    }
    if (std::abs(total) > 1e-9) {
      EXPECT_EQ(w.beats, total > 0);
    }
    EXPECT_NEAR(w.t_pp - w.t_ppll, total, 1e-12);
  }
}

TEST(SimulateTest, PpllStageOneExample) {
  const auto p = WithStageOneAux(4, 1, 1, 1);
  const auto r = SimulateSchedule(p, CommModel{0}, RunMode::kPPLL, 20);
  EXPECT_EQ(r.steady_batch_time, EstimatePPLL(p, CommModel{0}).batch_time);
  ExpectNoOverlap(r);
}

TEST(SimulateTest, EndToEndIsSerial) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 2u, 7u}) {
    const auto r = SimulateSchedule(Uniform(3, 1, 2, 3), {}, RunMode::kE2E, n);
    EXPECT_EQ(r.makespan, static_cast<double>(n) * 18.0);
    const auto p = RandomProfiles(rng, 4);
    const auto rr = SimulateSchedule(p, {}, RunMode::kE2E, n);
    EXPECT_NEAR(rr.makespan, static_cast<double>(n) * EstimateE2E(p).batch_time,
                1e-12);
  }
}

TEST(SimulateTest, ZeroCostProfiles) {
  const std::vector<StageProfile> zero(3);
  for (RunMode mode : kAllRunModes) {
    const auto r = SimulateSchedule(zero, {}, mode, 5);
    EXPECT_EQ(r.makespan, 0.0);
    EXPECT_EQ(r.steady_batch_time, 0.0);
    for (const auto& e : r.events) {
      EXPECT_EQ(e.start, 0.0);
      EXPECT_EQ(e.end, 0.0);
    }
  }
}

TEST(SimulateTest, FormulasHoldForEveryMode) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 1 + rng() % 8;
    auto p = RandomProfiles(rng, s);
    const CommModel q{std::uniform_real_distribution<double>(0, 1)(rng)};
    // Make stage 1 the bottleneck so its cycle is the pipeline rate.
    double worst = 0.0;
    for (const auto& sp : p) worst = std::max(worst, PpllStageCycle(sp, q));
    p[0].f_a += worst - PpllStageCycle(p[0], q);
    for (RunMode mode : kAllRunModes) {
      const auto r = SimulateSchedule(p, q, mode, 2 * s + 2);
      EXPECT_NEAR(r.steady_batch_time, Estimate(mode, p, q).batch_time, 1e-12)
          << RunModeName(mode) << " s=" << s;
      ExpectNoOverlap(r);
    }
  }
}

TEST(SimulateTest, PpllFollowsTheBottleneckStage) {
  // With a later stage slower than stage 1 the closed form understates the
  // schedule; the simulator reports the slowest cycle.
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 2 + rng() % 6;
    const auto p = RandomProfiles(rng, s);
    const CommModel q{0.25};
    double worst = 0.0;
    for (const auto& sp : p) worst = std::max(worst, PpllStageCycle(sp, q));
    for (std::size_t cap : {1u, 2u, 4u}) {
      const auto r = SimulateSchedule(p, q, RunMode::kPPLL, 20 * s, cap);
      EXPECT_NEAR(r.steady_batch_time, worst, 1e-9);
      EXPECT_GE(r.steady_batch_time + 1e-12, EstimatePPLL(p, q).batch_time);
      ExpectNoOverlap(r);
    }
  }
}

TEST(SimulateTest, RatioLawUnderUniformAssumptions) {
  for (double k : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    for (std::size_t s : {2u, 4u, 8u}) {
      auto p = Uniform(s, 1.0, 2.0, 0.5);
      p[0].f_a = k * p[0].f;
      p[0].b_a = k * p[0].b;
      p[0].u_a = k * p[0].u;
      const auto pp = SimulateSchedule(p, {}, RunMode::kNaivePP, 4 * s);
      const auto ppll = SimulateSchedule(p, {}, RunMode::kPPLL, 4 * s);
      EXPECT_NEAR(ppll.steady_batch_time / pp.steady_batch_time,
                  RatioIdeal(k, static_cast<int>(s)), 1e-12);
    }
  }
}

TEST(SimulateTest, CapacityBoundsProducerLead) {
  // A fast stage 1 feeding a slow stage 2 may run at most `cap` pushes ahead.
  std::vector<StageProfile> p = {{1, 0, 0, 0, 0, 0}, {5, 0, 0, 0, 0, 0}};
  for (std::size_t cap : {1u, 2u, 3u}) {
    const auto r = SimulateSchedule(p, {}, RunMode::kPPLL, 12, cap);
    std::map<std::int64_t, double> consumer_start, producer_push;
    for (const auto& e : r.events) {
      if (e.kind != EventKind::kForward) continue;
      if (e.stage == 1) consumer_start[e.batch_id] = e.start;
    }
    for (const auto& e : r.events) {
      if (e.stage == 0 && e.kind == EventKind::kAuxForward) {
        producer_push[e.batch_id] = e.start;
      }
    }
    for (std::int64_t n = static_cast<std::int64_t>(cap); n < 12; ++n) {
      EXPECT_GE(producer_push[n], consumer_start[n - static_cast<std::int64_t>(cap)]);
    }
  }
}

TEST(SimulateTest, Validation) {
  EXPECT_EQ(CodeOf([] { SimulateSchedule(Uniform(2), {}, RunMode::kPPLL, 0); }),
            ErrorCode::kInvalidArg);
  EXPECT_EQ(CodeOf([] { SimulateSchedule(Uniform(2), {}, RunMode::kPPLL, 4, 0); }),
            ErrorCode::kInvalidArg);
  EXPECT_EQ(CodeOf([] { SimulateSchedule({}, {}, RunMode::kPPLL, 4); }),
            ErrorCode::kEmptyProfiles);
  EXPECT_EQ(CodeOf([] {
              SimulateSchedule(Uniform(2), {}, static_cast<RunMode>(9), 4);
            }),
            ErrorCode::kInvalidMode);
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(GanttTest, SingleEvent) {
  const std::vector<ScheduleEvent> one = {{0, EventKind::kForward, 3, 0.5, 1.25}};
  const auto lines = Lines(RenderGanttCsv(one));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "stage,kind,batch_id,start,end");
  EXPECT_EQ(lines[1], "0,forward,3,0.500000,1.250000");
}

TEST(GanttTest, TwoStagePipeline) {
  const auto r = SimulateSchedule(WithStageOneAux(2, 1, 1, 1), {}, RunMode::kPPLL, 2);
  const auto text = RenderGanttCsv(r.events);
  const auto lines = Lines(text);
  EXPECT_EQ(lines.size(), r.events.size() + 1);
  ExpectNoOverlap(r);
  // Sorted by (start, stage).
  double prev_start = -1;
  std::size_t prev_stage = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string stage, kind, id, start;
    std::getline(row, stage, ',');
    std::getline(row, kind, ',');
    std::getline(row, id, ',');
    std::getline(row, start, ',');
    const double st = std::stod(start);
    const std::size_t sg = std::stoul(stage);
    EXPECT_TRUE(st > prev_start || (st == prev_start && sg >= prev_stage));
    prev_start = st;
    prev_stage = sg;
  }
  EXPECT_EQ(RenderGanttCsv(r.events), text);
}

TEST(GanttTest, EmptyEvents) {
  EXPECT_EQ(CodeOf([] { RenderGanttCsv({}); }), ErrorCode::kEmptyEvents);
}

TEST(GanttTest, KindNames) {
  EXPECT_EQ(EventKindName(EventKind::kForward), "forward");
  EXPECT_EQ(EventKindName(EventKind::kAuxForward), "aux_forward");
  EXPECT_EQ(EventKindName(EventKind::kBackward), "backward");
  EXPECT_EQ(EventKindName(EventKind::kUpdate), "update");
  EXPECT_EQ(EventKindName(EventKind::kComm), "comm");
}

}  // namespace
}  // namespace locopipe
