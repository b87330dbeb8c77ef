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
#include "locopipe/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "locopipe/error.hpp"

namespace locopipe {

double MetricsRecord::mean_loss() const {
  return stage_mean_loss.empty() ? 0.0 : stage_mean_loss.back();
}

std::size_t MetricsRecord::params_max_stage() const {
  std::size_t out = 0;
  for (const auto& m : stage_memory) out = std::max(out, m.params);
  return out;
}

std::size_t MetricsRecord::activations_max_stage() const {
  std::size_t out = 0;
  for (const auto& m : stage_memory) out = std::max(out, m.activations);
  return out;
}

namespace {

constexpr std::size_t kEvalChunk = 256;

void CheckShapes(const ExperimentConfig& cfg, const Dataset& ds) {
  if (cfg.layer_dims.empty()) {
    throw Error(ErrorCode::kInvalidValue, "layer_dims is required");
  }
  if (cfg.layer_dims.front() != ds.dim()) {
    throw Error(ErrorCode::kConfigMismatch,
                "layer_dims starts at " + std::to_string(cfg.layer_dims.front()) +
                    " but the data has " + std::to_string(ds.dim()) +
                    " features");
  }
  if (cfg.layer_dims.back() != static_cast<std::size_t>(ds.num_classes)) {
    throw Error(ErrorCode::kConfigMismatch,
                "layer_dims ends at " + std::to_string(cfg.layer_dims.back()) +
                    " but the data has " + std::to_string(ds.num_classes) +
                    " classes");
  }
}

// Broadcasts a per-stage list: empty -> fallback, 1 -> every stage.
std::vector<double> PerStage(const std::vector<double>& values,
                             std::size_t stages, double fallback,
                             const char* key) {
  if (values.empty()) return std::vector<double>(stages, fallback);
  if (values.size() == 1) return std::vector<double>(stages, values.front());
  if (values.size() != stages) {
    throw Error(ErrorCode::kConfigMismatch,
                std::string(key) + " has " + std::to_string(values.size()) +
                    " entries for " + std::to_string(stages) + " stages");
  }
  return values;
}

std::vector<MemoryProxy> StageMemory(RunMode mode, const NetworkSpec& spec,
                                     std::span<const LocalModule> modules,
                                     std::size_t batch_size) {
  if (mode == RunMode::kE2E) return {NetworkFootprint(spec, batch_size)};
  std::vector<MemoryProxy> out;
  for (const auto& m : modules) {
    out.push_back(MemoryFootprint(m, batch_size, mode == RunMode::kPPLL));
  }
  return out;
}

double EstimateK(const EpochMetrics* ppll_final,
                 std::span<const LocalModule> modules) {
  if (ppll_final && !ppll_final->deterministic &&
      ppll_final->forward_time.front() > 0.0) {
    return ppll_final->aux_forward_time.front() /
           ppll_final->forward_time.front();
  }
  const auto& first = modules.front();
  const auto block = first.block_param_count();
  return block == 0 ? 0.0
                    : static_cast<double>(first.aux_param_count()) /
                          static_cast<double>(block);
}

std::string Fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ExperimentData LoadExperimentData(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  ExperimentData out;
  switch (d.kind) {
    case DatasetKind::kBlobs:
      out.train = GenBlobs(d.n_per_class, d.classes, d.dim, d.spread, cfg.seed);
      out.test = GenBlobs(d.test_n_per_class, d.classes, d.dim, d.spread,
                          cfg.seed + 1);
      break;
    case DatasetKind::kSpirals:
      out.train = GenSpirals(d.n_per_class, d.noise, cfg.seed);
      out.test = GenSpirals(d.test_n_per_class, d.noise, cfg.seed + 1);
      break;
    case DatasetKind::kIdx:
      if (d.train_images.empty() || d.train_labels.empty() ||
          d.test_images.empty() || d.test_labels.empty()) {
        throw Error(ErrorCode::kInvalidValue,
                    "idx dataset needs train_images, train_labels, "
                    "test_images and test_labels");
      }
      out.train = LoadIdx(d.train_images, d.train_labels);
      out.test = LoadIdx(d.test_images, d.test_labels);
      // Both splits must agree on the class count for the head width.
      out.test.num_classes = out.train.num_classes =
          std::max(out.train.num_classes, out.test.num_classes);
      break;
  }
  return out;
}

RunConfig MakeRunConfig(const ExperimentConfig& cfg) {
  RunConfig rc;
  rc.buffer_capacity = cfg.buffer_capacity;
  rc.comm_padding = cfg.sleep_comm;
  const bool padded = !cfg.sleep_forward.empty() ||
                      !cfg.sleep_backward.empty() || !cfg.sleep_update.empty();
  if (padded) {
    const auto f = PerStage(cfg.sleep_forward, cfg.stages, 0.0, "sleep_forward");
    const auto b =
        PerStage(cfg.sleep_backward, cfg.stages, 0.0, "sleep_backward");
    const auto u = PerStage(cfg.sleep_update, cfg.stages, 0.0, "sleep_update");
    for (std::size_t j = 0; j < cfg.stages; ++j) {
      rc.padding.push_back({f[j], b[j], u[j]});
    }
  }
  return rc;
}

ModelHyper MakeModelHyper(const ExperimentConfig& cfg,
                          std::size_t batches_per_epoch) {
  ModelHyper h;
  h.aux_max_depth = cfg.aux_max_depth;
  h.aux_period = cfg.aux_period;
  h.aux_hidden_width = cfg.aux_hidden_width;
  h.lr0 = cfg.lr0;
  h.lr_min = cfg.lr_min;
  h.total_steps = static_cast<std::int64_t>(
      std::max<std::size_t>(1, cfg.epochs * batches_per_epoch));
  h.momentum = cfg.momentum;
  h.weight_decay = cfg.weight_decay;
  h.seed = cfg.seed;
  return h;
}

double Accuracy(std::span<const LocalModule> modules, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < ds.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(ds.size(), begin + kEvalChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Batch chunk = MakeBatch(ds, idx, 0);
    const auto pred = ArgMaxRows(NetworkForward(modules, chunk.features));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (static_cast<int>(pred[i]) == chunk.labels[i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

ExperimentResult RunExperiment(
    const ExperimentConfig& cfg,
    const std::function<void(const MetricsRecord&)>& on_record) {
  if (cfg.modes.empty()) {
    throw Error(ErrorCode::kInvalidValue, "no modes requested");
  }
  const ExperimentData data = LoadExperimentData(cfg);
  CheckShapes(cfg, data.train);
  CheckShapes(cfg, data.test);

  const NetworkSpec spec{cfg.layer_dims};
  const PartitionPlan plan = Partition(spec, cfg.stages);
  const std::size_t per_epoch =
      Batches(data.train, cfg.batch_size, cfg.shuffle, cfg.seed).num_batches();
  const auto initial = BuildModules(spec, plan, MakeModelHyper(cfg, per_epoch));
  const RunConfig run_config = MakeRunConfig(cfg);

  ExperimentResult result;
  result.report.stages = cfg.stages;
  std::optional<EpochMetrics> ppll_final;

  for (const RunMode mode : cfg.modes) {
    auto modules = CloneModules(initial);
    EpochMetrics last;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      // Same order for every mode: the shuffle seed depends on the epoch only.
      BatchIterator batches =
          Batches(data.train, cfg.batch_size, cfg.shuffle, cfg.seed + epoch);
      last = cfg.deterministic
                 ? RunDeterministic(mode, modules, batches, run_config)
                 : RunEpoch(mode, modules, batches, run_config);

      MetricsRecord rec;
      rec.mode = mode;
      rec.epoch = epoch + 1;
      rec.batches_per_sec = Throughput(last, per_epoch);
      rec.stage_mean_loss = last.mean_loss;
      rec.train_acc = Accuracy(modules, data.train);
      rec.test_acc = Accuracy(modules, data.test);
      rec.stage_memory = StageMemory(mode, spec, modules, cfg.batch_size);
      rec.mean_staleness = last.mean_staleness();
      if (on_record) on_record(rec);
      result.records.push_back(std::move(rec));
    }

    const MetricsRecord& final_rec = result.records.back();
    result.report.modes.push_back({mode, final_rec.batches_per_sec,
                                   final_rec.test_acc,
                                   final_rec.params_max_stage(),
                                   final_rec.activations_max_stage()});
    if (mode == RunMode::kPPLL) ppll_final = last;
  }

  auto& report = result.report;
  report.k = EstimateK(ppll_final ? &*ppll_final : nullptr, initial);
  report.ratio_ideal = RatioIdeal(report.k, static_cast<int>(cfg.stages));
  const ModeSummary* pp = nullptr;
  const ModeSummary* ppll = nullptr;
  for (const auto& m : report.modes) {
    if (m.mode == RunMode::kNaivePP) pp = &m;
    if (m.mode == RunMode::kPPLL) ppll = &m;
  }
  if (pp && ppll && pp->batches_per_sec > 0.0) {
    report.ppll_over_pp = ppll->batches_per_sec / pp->batches_per_sec;
  }
  return result;
}

std::string MetricsCsv(std::span<const MetricsRecord> records) {
  if (records.empty()) {
    throw Error(ErrorCode::kInvalidArg, "no metrics records");
  }
  std::vector<const MetricsRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricsRecord* a, const MetricsRecord* b) {
                     if (a->mode != b->mode) return a->mode < b->mode;
                     return a->epoch < b->epoch;
                   });
  std::string out =
      "mode,epoch,batches_per_sec,mean_loss,train_acc,test_acc,"
      "params_max_stage,activations_max_stage,mean_staleness\n";
  for (const auto* r : sorted) {
    out += std::string(RunModeName(r->mode)) + ',' + std::to_string(r->epoch) +
           ',' + Fixed6(r->batches_per_sec) + ',' + Fixed6(r->mean_loss()) +
           ',' + Fixed6(r->train_acc) + ',' + Fixed6(r->test_acc) + ',' +
           std::to_string(r->params_max_stage()) + ',' +
           std::to_string(r->activations_max_stage()) + ',' +
           Fixed6(r->mean_staleness) + '\n';
  }
  return out;
}

void WriteMetricsCsv(std::span<const MetricsRecord> records,
                     const std::filesystem::path& path) {
  const std::string csv = MetricsCsv(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << csv;
  if (!out.flush()) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

std::string ReportTable(const ComparisonReport& report) {
  std::vector<std::vector<std::string>> rows = {
      {"mode", "batches_per_sec", "test_acc", "params_max_stage",
       "activations_max_stage"}};
  for (const auto& m : report.modes) {
    rows.push_back({std::string(RunModeName(m.mode)),
                    Fixed6(m.batches_per_sec), Fixed6(m.test_acc),
                    std::to_string(m.params_max_stage),
                    std::to_string(m.activations_max_stage)});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        os << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        os << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    os << '\n';
  }
  if (report.ppll_over_pp) {
    os << "measured PPLL/NaivePP = " << Fixed6(*report.ppll_over_pp) << '\n';
  }
  os << "analytic (k+1)/s = " << Fixed6(report.ratio_ideal) << '\n';
  return os.str();
}

std::vector<StageProfile> ConfigProfiles(const ExperimentConfig& cfg) {
  const std::size_t s = cfg.stages;
  const auto f = PerStage(cfg.profile_f, s, 0.0, "profile_f");
  const auto b = PerStage(cfg.profile_b, s, 0.0, "profile_b");
  const auto u = PerStage(cfg.profile_u, s, 0.0, "profile_u");
  const auto fa = PerStage(cfg.profile_f_a, s, 0.0, "profile_f_a");
  const auto ba = PerStage(cfg.profile_b_a, s, 0.0, "profile_b_a");
  const auto ua = PerStage(cfg.profile_u_a, s, 0.0, "profile_u_a");
  std::vector<StageProfile> out(s);
  for (std::size_t j = 0; j < s; ++j) out[j] = {f[j], b[j], u[j], fa[j], ba[j], ua[j]};
  return out;
}

}  // namespace locopipe
