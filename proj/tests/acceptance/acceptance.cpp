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
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `acceptance 3 6` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "locopipe/config.hpp"
#include "locopipe/cost_model.hpp"
#include "locopipe/data.hpp"
#include "locopipe/experiment.hpp"
#include "locopipe/model.hpp"
#include "locopipe/runtime.hpp"
#include "locopipe/tape.hpp"

namespace locopipe {
namespace {

using Clock = std::chrono::steady_clock;
using ::locopipe::testing::CentralDiff;
using ::locopipe::testing::MaxRelError;
using ::locopipe::testing::RandomValues;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::vector<double> Params(std::span<const LocalModule> modules) {
  std::vector<double> out;
  for (const auto& m : modules) {
    for (const auto& p : m.block_parameters())
      out.insert(out.end(), p.data().begin(), p.data().end());
    for (const auto& p : m.aux_parameters())
      out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return out;
}

// 1. Simulated steady batch time equals the closed forms.
Outcome FormulaExactness() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t s = 1 + rng() % 8;
    std::vector<StageProfile> p(s);
    for (auto& sp : p) sp = {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
    const CommModel q{d(rng)};
    // The closed form for PPLL is the first stage's cycle; keep that stage
    // the bottleneck by topping up its aux forward.
    double slowest = 0.0;
    for (const auto& sp : p) slowest = std::max(slowest, PpllStageCycle(sp, q));
    p[0].f_a += slowest - PpllStageCycle(p[0], q);
    for (RunMode mode : kAllRunModes) {
      const auto sim = SimulateSchedule(p, q, mode, 2 * s + 2);
      worst = std::max(worst, std::abs(sim.steady_batch_time -
                                       Estimate(mode, p, q).batch_time));
      ++cases;
    }
  }
  return {worst <= 1e-12,
          Fmt("max |sim - formula| = %.3g over %d cases", worst, cases)};
}

// 2. PPLL / PP steady ratio equals (k + 1) / s under uniform assumptions.
Outcome RatioLaw() {
  double worst = 0.0;
  int cases = 0;
  for (double k : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    for (int s : {2, 4, 8}) {
      std::vector<StageProfile> p(s, StageProfile{1.0, 2.0, 0.5, 0, 0, 0});
      p[0].f_a = k * p[0].f;
      p[0].b_a = k * p[0].b;
      p[0].u_a = k * p[0].u;
      const auto pp = SimulateSchedule(p, {}, RunMode::kNaivePP, 4 * s);
      const auto ppll = SimulateSchedule(p, {}, RunMode::kPPLL, 4 * s);
      worst = std::max(worst, std::abs(ppll.steady_batch_time / pp.steady_batch_time -
                                       RatioIdeal(k, s)));
      ++cases;
    }
  }
  return {worst <= 1e-12, Fmt("max ratio error = %.3g over %d cases", worst, cases)};
}

// 3. Wall-clock speedup of the threaded pipeline over end-to-end.
Outcome WallClockPipelining() {
  constexpr double kPad = 0.02;
  constexpr std::size_t kBatches = 40;
  const Dataset ds = GenBlobs(kBatches * 2, 2, 4, 0.5, 3);  // bs 4 -> 40 batches
  const NetworkSpec spec{{4, 8, 8, 8, 2}};
  ModelHyper hyper;
  hyper.aux_max_depth = 1;
  const auto initial = BuildModules(spec, Partition(spec, 4), hyper);
  RunConfig cfg;
  cfg.padding = {{kPad, kPad, kPad}};
  double bps[2];
  const RunMode modes[2] = {RunMode::kE2E, RunMode::kPPLL};
  for (int i = 0; i < 2; ++i) {
    auto modules = CloneModules(initial);
    BatchIterator it(ds, 4, true, 5);
    const auto m = RunEpoch(modes[i], modules, it, cfg);
    bps[i] = Throughput(m, kBatches);
  }
  const double ratio = bps[1] / bps[0];
  return {ratio >= 3.0 && ratio <= 4.2,
          Fmt("PPLL %.3f bs/s / E2E %.3f bs/s = %.3f (N=%zu, pad %.0f ms)", bps[1],
              bps[0], ratio, kBatches, kPad * 1e3)};
}

// 4. A local update touches only its own stage.
Outcome GradientIsolation() {
  std::mt19937_64 rng(404);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t s = 2 + rng() % 5;
    std::vector<std::size_t> dims(s + 1 + rng() % 3);
    for (auto& w : dims) w = 2 + rng() % 7;
    const NetworkSpec spec{dims};
    ModelHyper hyper;
    hyper.seed = trial;
    hyper.aux_max_depth = 1 + static_cast<int>(rng() % 3);
    auto modules = BuildModules(spec, Partition(spec, s), hyper);
    const std::size_t j = rng() % s;
    std::vector<std::vector<double>> before;
    for (const auto& m : modules) before.push_back(Params(std::span(&m, 1)));
    const std::size_t rows = 1 + rng() % 6;
    const Tensor x = Tensor::Matrix(rows, modules[j].input_width(),
                                    RandomValues(rng, rows * modules[j].input_width()));
    std::vector<int> labels(rows);
    for (int& y : labels) y = static_cast<int>(rng() % spec.num_classes());
    modules[j].local_loss_and_update(x, labels);
    for (std::size_t i = 0; i < s; ++i) {
      if (i != j && Params(std::span(&modules[i], 1)) != before[i]) ++violations;
    }
  }
  return {violations == 0, Fmt("%d foreign-stage changes in 100 trials", violations)};
}

// 5. Every primitive and a composed block against central differences.
Outcome Gradcheck() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t b = 1 + rng() % 4, n = 1 + rng() % 4, c = 2 + rng() % 3;
    Tensor x = Tensor::Matrix(b, n, RandomValues(rng, b * n), true);
    Tensor y = Tensor::Matrix(b, n, RandomValues(rng, b * n), true);
    Tensor w = Tensor::Matrix(n, c, RandomValues(rng, n * c), true);
    Tensor bias = Tensor({c}, RandomValues(rng, c), true);
    std::vector<int> labels(b);
    for (int& l : labels) l = static_cast<int>(rng() % c);
    const double factor = RandomValues(rng, 1, -2, 2)[0];
    // Exercises add, scale, matmul, bias_add, relu, sum and softmax_xent.
    auto graph = [&](GradTape* tape) {
      if (tape) {
        const Tensor h = tape->relu(tape->bias_add(
            tape->matmul(tape->add(x, tape->scale(y, factor)), w), bias));
        return tape->add(tape->softmax_xent(h, labels),
                         tape->scale(tape->sum(h), 0.1));
      }
      const Tensor h = Relu(BiasAdd(MatMul(Add(x, Scale(y, factor)), w), bias));
      return Add(SoftmaxCrossEntropy(h, labels), Scale(Sum(h), 0.1));
    };
    GradTape tape;
    tape.backward(graph(&tape));
    auto plain = [&] { return graph(nullptr).item(); };
    for (Tensor* t : {&x, &y, &w, &bias}) {
      const std::vector<double> analytic(t->grad().begin(), t->grad().end());
      worst = std::max(worst, MaxRelError(analytic, CentralDiff(plain, t->mutable_data())));
    }

    // Composed block + aux head, at most 64 parameters per stage.
    const NetworkSpec spec{{n, 3, 3, c}};
    ModelHyper hyper;
    hyper.seed = instance;
    hyper.aux_max_depth = 1;
    hyper.aux_hidden_width = 2;
    auto modules = BuildModules(spec, Partition(spec, 2), hyper);
    auto& m = modules[0];
    const Tensor input = x.detach();
    ForwardPass pass = m.forward(input);
    m.local_backward(pass, labels);
    auto params = m.block_parameters();
    const auto aux = m.aux_parameters();
    params.insert(params.end(), aux.begin(), aux.end());
    auto local = [&] {
      return SoftmaxCrossEntropy(DenseForward(nullptr, m.aux().layers, m.infer(input)),
                                 labels)
          .item();
    };
    for (auto& p : params) {
      const std::vector<double> analytic(p.grad().begin(), p.grad().end());
      worst = std::max(worst, MaxRelError(analytic, CentralDiff(local, p.mutable_data())));
    }
  }
  return {worst < 1e-4, Fmt("max relative error = %.3g over 50 instances", worst)};
}

ExperimentConfig SpiralConfig() {
  return ParseConfigText(R"(
dataset = spirals
n_per_class = 100
test_n_per_class = 100
noise = 0.05
layer_dims = 2, 64, 64, 64, 64, 2
stages = 4
aux_max_depth = 2
epochs = 50
batch_size = 8
lr0 = 0.03
seed = 42
modes = E2E, PPLL
)");
}

// 6. Local learning matches end-to-end accuracy on two spirals.
Outcome AccuracyParity() {
  const auto result = RunExperiment(SpiralConfig());
  double e2e = 0.0, ppll = 0.0;
  for (const auto& m : result.report.modes) {
    (m.mode == RunMode::kE2E ? e2e : ppll) = m.test_acc;
  }
  const bool pass = e2e >= 0.90 && ppll >= 0.90 && std::abs(e2e - ppll) <= 0.05;
  return {pass, Fmt("test acc E2E %.3f, PPLL %.3f, gap %.3f", e2e, ppll,
                    std::abs(e2e - ppll))};
}

// 7. Memory proxy grows with aux depth; one stage is smaller than the whole.
Outcome MemoryOrdering() {
  const NetworkSpec spec{{2, 64, 64, 64, 64, 2}};
  const auto plan = Partition(spec, 4);
  constexpr std::size_t kBatch = 32;
  std::size_t stage0[3];
  std::size_t max_stage_d2 = 0;
  for (int d = 2; d <= 4; ++d) {
    ModelHyper hyper;
    hyper.aux_max_depth = d;
    const auto modules = BuildModules(spec, plan, hyper);
    stage0[d - 2] = MemoryFootprint(modules[0], kBatch).total();
    if (d == 2) {
      for (const auto& m : modules) {
        max_stage_d2 = std::max(max_stage_d2, MemoryFootprint(m, kBatch).total());
      }
    }
  }
  const std::size_t e2e = NetworkFootprint(spec, kBatch).total();
  const bool pass = stage0[0] < stage0[1] && stage0[1] < stage0[2] && max_stage_d2 < e2e;
  return {pass, Fmt("stage-0 floats d'=2/3/4: %zu < %zu < %zu; max stage %zu < E2E %zu",
                    stage0[0], stage0[1], stage0[2], max_stage_d2, e2e)};
}

// 8. FIFO, capacity and termination over random pipelines.
Outcome QueueSemantics() {
  std::mt19937_64 rng(808);
  int failures = 0;
  std::size_t max_hw = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t s = 1 + rng() % 6;
    const std::size_t cap = 1 + rng() % 4;
    const std::size_t n = 1 + rng() % 40;
    const RunMode mode = (trial % 2) ? RunMode::kPPLL : RunMode::kNaivePP;
    auto job = std::async(std::launch::async, [=] {
      const Dataset ds = GenBlobs(n, 1, 3, 0.5, trial);  // n rows, bs 1
      std::vector<std::size_t> dims(s + 1, 4);
      dims.front() = 3;
      dims.back() = 1;
      const NetworkSpec spec{dims};
      auto modules = BuildModules(spec, Partition(spec, s), ModelHyper{});
      RunConfig cfg;
      cfg.buffer_capacity = cap;
      BatchIterator it(ds, 1, true, trial);
      return RunEpoch(mode, modules, it, cfg);
    });
    if (job.wait_for(std::chrono::seconds(10)) != std::future_status::ready) {
      std::printf("FAIL 8 queue semantics: trial %d did not terminate\n", trial);
      std::fflush(stdout);
      std::_Exit(1);
    }
    const auto m = job.get();
    for (const auto& ids : m.visited) {
      std::vector<std::int64_t> expect(n);
      for (std::size_t i = 0; i < n; ++i) expect[i] = static_cast<std::int64_t>(i);
      if (ids != expect) ++failures;
    }
    for (std::size_t hw : m.buffer_high_water) {
      max_hw = std::max(max_hw, hw);
      if (hw > cap) ++failures;
    }
  }
  return {failures == 0,
          Fmt("50 configs terminated; %d order/capacity violations", failures)};
}

// 9. Deterministic runs repeat byte for byte; s = 1 modes coincide.
Outcome Determinism() {
  auto cfg = ParseConfigText(R"(
dataset = blobs
n_per_class = 30
test_n_per_class = 20
classes = 3
dim = 4
layer_dims = 4, 8, 8, 8, 3
stages = 3
epochs = 3
batch_size = 6
deterministic = true
)");
  const std::string a = MetricsCsv(RunExperiment(cfg).records);
  const std::string b = MetricsCsv(RunExperiment(cfg).records);

  const Dataset ds = GenBlobs(30, 3, 4, 0.5, 7);
  const NetworkSpec spec{{4, 8, 8, 3}};
  const auto initial = BuildModules(spec, Partition(spec, 1), ModelHyper{});
  std::vector<std::vector<double>> traces, params;
  for (RunMode mode : kAllRunModes) {
    auto modules = CloneModules(initial);
    BatchIterator it(ds, 5, true, 1);
    traces.push_back(RunEpoch(mode, modules, it, {}).loss_trace.back());
    params.push_back(Params(modules));
  }
  const bool same_modes =
      std::all_of(traces.begin(), traces.end(), [&](auto& t) { return t == traces[0]; }) &&
      std::all_of(params.begin(), params.end(), [&](auto& p) { return p == params[0]; });
  return {a == b && same_modes,
          Fmt("CSV repeat identical: %s; s=1 trajectories identical: %s",
              a == b ? "yes" : "no", same_modes ? "yes" : "no")};
}

// 10. Aux depth substitutions and clamp.
Outcome AuxDepthTable() {
  const int a = AuxDepth(0, 4, 3), b = AuxDepth(3, 4, 3), c = AuxDepth(11, 2, 3);
  return {a == 4 && b == 3 && c == 0,
          Fmt("(0,4,3)->%d (3,4,3)->%d (11,2,3)->%d", a, b, c)};
}

}  // namespace
}  // namespace locopipe

int main(int argc, char** argv) {
  using namespace locopipe;
  const std::vector<Criterion> criteria = {
      {1, "formula exactness", 10, FormulaExactness},
      {2, "ratio law", 10, RatioLaw},
      {3, "wall-clock pipelining", 120, WallClockPipelining},
      {4, "gradient isolation", 30, GradientIsolation},
      {5, "gradcheck", 30, Gradcheck},
      {6, "accuracy parity", 180, AccuracyParity},
      {7, "memory-proxy ordering", 1, MemoryOrdering},
      {8, "queue semantics", 600, QueueSemantics},
      {9, "determinism", 60, Determinism},
      {10, "aux depth table", 1, AuxDepthTable},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      out.pass = false;
      out.detail += Fmt("; over the %.0f s budget", c.budget_seconds);
    }
    std::printf("%s %d %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
