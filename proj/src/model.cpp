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
#include "locopipe/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "locopipe/error.hpp"

namespace locopipe {

void NetworkSpec::Validate() const {
  if (layer_dims.size() < 2) {
    throw Error(ErrorCode::kInvalidArg,
                "layer_dims needs an input and an output width");
  }
  for (std::size_t w : layer_dims) {
    if (w < 1) throw Error(ErrorCode::kInvalidArg, "layer widths must be >= 1");
  }
}

std::size_t LayerParamCount(const NetworkSpec& spec, std::size_t layer) {
  return spec.layer_dims[layer] * spec.layer_dims[layer + 1] +
         spec.layer_dims[layer + 1];
}

std::size_t NetworkParamCount(const NetworkSpec& spec) {
  std::size_t total = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    total += LayerParamCount(spec, l);
  }
  return total;
}

PartitionPlan Partition(const NetworkSpec& spec, std::size_t stages) {
  spec.Validate();
  const std::size_t layers = spec.num_layers();
  if (stages < 1) throw Error(ErrorCode::kInvalidArg, "stages must be >= 1");
  if (stages > layers) {
    throw Error(ErrorCode::kTooManyStages,
                std::to_string(stages) + " stages for " +
                    std::to_string(layers) + " layers");
  }
  std::vector<std::size_t> prefix(layers + 1, 0);
  for (std::size_t l = 0; l < layers; ++l) {
    prefix[l + 1] = prefix[l] + LayerParamCount(spec, l);
  }
  auto cost = [&](std::size_t b, std::size_t e) { return prefix[e] - prefix[b]; };

  // best[k][i]: smallest achievable max stage cost for layers [i, L) split
  // into k parts.
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> best(
      stages + 1, std::vector<std::size_t>(layers + 1, kInf));
  for (std::size_t i = 0; i < layers; ++i) best[1][i] = cost(i, layers);
  for (std::size_t k = 2; k <= stages; ++k) {
    for (std::size_t i = 0; i + k <= layers; ++i) {
      for (std::size_t e = i + 1; e + (k - 1) <= layers; ++e) {
        best[k][i] = std::min(best[k][i], std::max(cost(i, e), best[k - 1][e]));
      }
    }
  }
  const std::size_t optimum = best[stages][0];

  PartitionPlan plan;
  plan.stages = stages;
  std::size_t start = 0;
  for (std::size_t part = 0; part + 1 < stages; ++part) {
    const std::size_t remaining = stages - part - 1;
    std::size_t end = start + 1;
    while (cost(start, end) > optimum || best[remaining][end] > optimum) ++end;
    plan.boundaries.push_back({start, end});
    start = end;
  }
  plan.boundaries.push_back({start, layers});
  return plan;
}

int AuxDepth(int l, int d_prime, int n) {
  if (l < 0 || d_prime < 1 || n < 1) {
    throw Error(ErrorCode::kInvalidArg,
                "aux depth needs l >= 0, d' >= 1, n >= 1");
  }
  return std::max(0, d_prime - l / n);
}

Tensor DenseForward(GradTape* tape, std::span<const DenseLayer> layers,
                    const Tensor& x) {
  Tensor h = x;
  for (const DenseLayer& layer : layers) {
    if (h.cols() != layer.in_width()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer expects width " + std::to_string(layer.in_width()) +
                      ", got " + std::to_string(h.cols()));
    }
    if (tape) {
      h = tape->bias_add(tape->matmul(h, layer.weight), layer.bias);
      if (layer.relu) h = tape->relu(h);
    } else {
      h = BiasAdd(MatMul(h, layer.weight), layer.bias);
      if (layer.relu) h = Relu(h);
    }
  }
  return h;
}

namespace {

DenseLayer InitLayer(std::size_t in, std::size_t out, bool relu,
                     std::mt19937_64& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> w(in * out);
  for (double& v : w) v = dist(rng);
  std::vector<double> b(out);
  for (double& v : b) v = dist(rng);
  return DenseLayer{Tensor({in, out}, std::move(w), true),
                    Tensor({out}, std::move(b), true), relu};
}

std::vector<Tensor> LayerParams(std::span<const DenseLayer> layers) {
  std::vector<Tensor> out;
  out.reserve(layers.size() * 2);
  for (const DenseLayer& layer : layers) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
  }
  return out;
}

std::size_t CountParams(std::span<const DenseLayer> layers) {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers) n += layer.param_count();
  return n;
}

std::vector<DenseLayer> CloneLayers(std::span<const DenseLayer> layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const DenseLayer& layer : layers) {
    out.push_back({layer.weight.clone(), layer.bias.clone(), layer.relu});
  }
  return out;
}

std::size_t ActivationFloats(std::span<const DenseLayer> layers,
                             std::size_t batch) {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers) {
    n += batch * layer.out_width() * (layer.relu ? 2 : 1);
  }
  return n;
}

}  // namespace

LocalModule::LocalModule(std::size_t stage_index, bool is_final,
                         int nominal_aux_depth, std::vector<DenseLayer> block,
                         AuxHead aux, const ModelHyper& hyper)
    : stage_index_(stage_index),
      is_final_(is_final),
      nominal_aux_depth_(nominal_aux_depth),
      block_(std::move(block)),
      aux_(std::move(aux)) {
  if (block_.empty()) {
    throw Error(ErrorCode::kInvalidArg, "a stage needs at least one layer");
  }
  if (hyper.lr_min > hyper.lr0) {
    throw Error(ErrorCode::kInvalidArg, "lr_min must not exceed lr0");
  }
  const auto bp = block_parameters();
  const auto ap = aux_parameters();
  block_opt_ = OptimizerState::ForParams(bp, hyper.momentum, hyper.weight_decay);
  aux_opt_ = OptimizerState::ForParams(ap, hyper.momentum, hyper.weight_decay);
  schedule_ = LrSchedule{hyper.lr0, hyper.lr_min,
                         std::max<std::int64_t>(1, hyper.total_steps)};
}

std::vector<Tensor> LocalModule::block_parameters() const {
  return LayerParams(block_);
}

std::vector<Tensor> LocalModule::aux_parameters() const {
  return LayerParams(aux_.layers);
}

std::size_t LocalModule::block_param_count() const { return CountParams(block_); }

std::size_t LocalModule::aux_param_count() const {
  return CountParams(aux_.layers);
}

Tensor LocalModule::block_forward(GradTape& tape, const Tensor& x) const {
  return DenseForward(&tape, block_, x);
}

Tensor LocalModule::infer(const Tensor& x) const {
  return DenseForward(nullptr, block_, x);
}

Tensor LocalModule::aux_forward(GradTape& tape, const Tensor& features) const {
  if (aux_.passthrough()) return features;
  return DenseForward(&tape, aux_.layers, features);
}

ForwardPass LocalModule::forward(const Tensor& x_in, bool track_input) const {
  ForwardPass pass;
  pass.input = x_in;
  if (track_input) {
    pass.input = x_in.detach();
    pass.input.set_track_grad(true);
  }
  pass.features = block_forward(pass.tape, pass.input);
  return pass;
}

double LocalModule::local_backward(ForwardPass& pass,
                                   std::span<const int> labels,
                                   LocalTimings* timings) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const Tensor logits = aux_forward(pass.tape, pass.features);
  const auto t1 = Clock::now();
  const Tensor loss = pass.tape.softmax_xent(logits, labels);
  pass.tape.backward(loss);
  if (timings) {
    timings->aux_forward += std::chrono::duration<double>(t1 - t0).count();
    timings->backward +=
        std::chrono::duration<double>(Clock::now() - t1).count();
  }
  return loss.item();
}

double LocalModule::current_lr() const {
  const std::int64_t step =
      std::min(block_opt_.step_count, schedule_.total_steps);
  return CosineLr(step, schedule_);
}

void LocalModule::apply_local_update() {
  const double lr = current_lr();
  auto bp = block_parameters();
  auto ap = aux_parameters();
  SgdNesterovStep(bp, block_opt_, lr);
  SgdNesterovStep(ap, aux_opt_, lr);
}

void LocalModule::apply_block_update() {
  const double lr = current_lr();
  auto bp = block_parameters();
  SgdNesterovStep(bp, block_opt_, lr);
}

LocalStepResult LocalModule::local_loss_and_update(
    const Tensor& x_in, std::span<const int> labels) {
  if (x_in.track_grad()) {
    throw Error(ErrorCode::kInvalidArg,
                "local update input must be detached from upstream tapes");
  }
  ForwardPass pass = forward(x_in);
  LocalStepResult result;
  result.output = pass.features.detach();
  result.loss = local_backward(pass, labels);
  apply_local_update();
  return result;
}

LocalModule LocalModule::clone() const {
  AuxHead aux{aux_.depth, aux_.hidden_width, CloneLayers(aux_.layers)};
  ModelHyper hyper;
  hyper.momentum = block_opt_.mu;
  hyper.weight_decay = block_opt_.weight_decay;
  hyper.lr0 = schedule_.lr0;
  hyper.lr_min = schedule_.lr_min;
  hyper.total_steps = schedule_.total_steps;
  LocalModule copy(stage_index_, is_final_, nominal_aux_depth_,
                   CloneLayers(block_), std::move(aux), hyper);
  copy.block_opt_ = block_opt_;
  copy.aux_opt_ = aux_opt_;
  return copy;
}

std::vector<LocalModule> BuildModules(const NetworkSpec& spec,
                                      const PartitionPlan& plan,
                                      const ModelHyper& hyper) {
  spec.Validate();
  const std::size_t layers = spec.num_layers();
  if (plan.stages != plan.boundaries.size() || plan.stages == 0) {
    throw Error(ErrorCode::kConfigMismatch, "plan stage count disagrees");
  }
  std::size_t expect = 0;
  for (const LayerRange& r : plan.boundaries) {
    if (r.begin != expect || r.end <= r.begin || r.end > layers) {
      throw Error(ErrorCode::kConfigMismatch,
                  "plan ranges must be contiguous and cover every layer");
    }
    expect = r.end;
  }
  if (expect != layers) {
    throw Error(ErrorCode::kConfigMismatch, "plan does not cover every layer");
  }

  std::vector<LocalModule> modules;
  modules.reserve(plan.stages);
  for (std::size_t j = 0; j < plan.stages; ++j) {
    std::mt19937_64 rng(hyper.seed + j);
    const LayerRange range = plan.boundaries[j];
    std::vector<DenseLayer> block;
    for (std::size_t l = range.begin; l < range.end; ++l) {
      block.push_back(InitLayer(spec.layer_dims[l], spec.layer_dims[l + 1],
                                l + 1 < layers, rng));
    }
    const bool is_final = j + 1 == plan.stages;
    const int nominal = AuxDepth(static_cast<int>(j), hyper.aux_max_depth,
                                 hyper.aux_period);
    AuxHead aux;
    if (!is_final) {
      const std::size_t width = spec.layer_dims[range.end];
      aux.depth = nominal;
      aux.hidden_width =
          hyper.aux_hidden_width ? hyper.aux_hidden_width : width;
      std::size_t in = width;
      for (int d = 0; d < aux.depth; ++d) {
        aux.layers.push_back(InitLayer(in, aux.hidden_width, true, rng));
        in = aux.hidden_width;
      }
      aux.layers.push_back(InitLayer(in, spec.num_classes(), false, rng));
    }
    modules.emplace_back(j, is_final, nominal, std::move(block),
                         std::move(aux), hyper);
  }
  return modules;
}

std::vector<LocalModule> CloneModules(std::span<const LocalModule> modules) {
  std::vector<LocalModule> out;
  out.reserve(modules.size());
  for (const LocalModule& m : modules) out.push_back(m.clone());
  return out;
}

Tensor NetworkForward(std::span<const LocalModule> modules, const Tensor& x) {
  Tensor h = x;
  for (const LocalModule& m : modules) h = m.infer(h);
  return h;
}

MemoryProxy MemoryFootprint(const LocalModule& module, std::size_t batch_size,
                            bool include_aux) {
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArg, "batch size must be >= 1");
  }
  MemoryProxy proxy;
  proxy.params = module.block_param_count();
  proxy.activations = batch_size * module.input_width() +
                      ActivationFloats(module.block(), batch_size);
  if (include_aux) {
    proxy.params += module.aux_param_count();
    proxy.activations += ActivationFloats(module.aux().layers, batch_size);
  }
  return proxy;
}

MemoryProxy NetworkFootprint(const NetworkSpec& spec, std::size_t batch_size) {
  spec.Validate();
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArg, "batch size must be >= 1");
  }
  MemoryProxy proxy;
  proxy.params = NetworkParamCount(spec);
  proxy.activations = batch_size * spec.layer_dims.front();
  const std::size_t layers = spec.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    proxy.activations +=
        batch_size * spec.layer_dims[l + 1] * (l + 1 < layers ? 2 : 1);
  }
  return proxy;
}

}  // namespace locopipe
