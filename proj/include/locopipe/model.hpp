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
#ifndef LOCOPIPE_MODEL_HPP_
#define LOCOPIPE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "locopipe/optimizer.hpp"
#include "locopipe/tape.hpp"
#include "locopipe/tensor.hpp"

namespace locopipe {

enum class Activation { kRelu };

// Widths of a dense network: input, hidden..., class count. Layer i maps
// layer_dims[i] -> layer_dims[i + 1]; every layer but the last is followed
// by the activation.
struct NetworkSpec {
  std::vector<std::size_t> layer_dims;
  Activation activation = Activation::kRelu;

  std::size_t num_layers() const {
    return layer_dims.empty() ? 0 : layer_dims.size() - 1;
  }
  std::size_t num_classes() const { return layer_dims.back(); }
  void Validate() const;
};

// Trainable floats (weights plus bias) of one layer.
std::size_t LayerParamCount(const NetworkSpec& spec, std::size_t layer);
std::size_t NetworkParamCount(const NetworkSpec& spec);

struct LayerRange {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::size_t size() const { return end - begin; }
  bool operator==(const LayerRange&) const = default;
};

struct PartitionPlan {
  std::size_t stages = 0;
  std::vector<LayerRange> boundaries;
};

// Contiguous split into `stages` non-empty ranges minimizing the largest
// per-stage parameter count. Among optimal splits the lexicographically
// earliest cut points win.
PartitionPlan Partition(const NetworkSpec& spec, std::size_t stages);

// Auxiliary head depth for stage `l`: d_prime - floor(l / n), clamped at 0.
int AuxDepth(int l, int d_prime, int n);

struct DenseLayer {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]
  bool relu = false;

  std::size_t in_width() const { return weight.rows(); }
  std::size_t out_width() const { return weight.cols(); }
  std::size_t param_count() const { return weight.numel() + bias.numel(); }
};

// Runs `layers` in order; records on `tape` when non-null.
Tensor DenseForward(GradTape* tape, std::span<const DenseLayer> layers,
                    const Tensor& x);

// `depth` dense+ReLU layers of `hidden_width` followed by a linear
// classifier. A passthrough head has no layers: the block output already
// is the task logits (final stage).
struct AuxHead {
  int depth = 0;
  std::size_t hidden_width = 0;
  std::vector<DenseLayer> layers;

  bool passthrough() const { return layers.empty(); }
};

struct ModelHyper {
  int aux_max_depth = 2;       // d'
  int aux_period = 3;          // n
  std::size_t aux_hidden_width = 0;  // 0 -> block output width
  double lr0 = 0.01;
  double lr_min = 0.0;
  std::int64_t total_steps = 1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t seed = 42;
};

// Block forward recorded on a stage-private tape.
struct ForwardPass {
  GradTape tape;
  Tensor input;
  Tensor features;
};

// Wall-clock seconds spent inside local_backward.
struct LocalTimings {
  double aux_forward = 0.0;
  double backward = 0.0;
};

struct LocalStepResult {
  double loss = 0.0;
  Tensor output;  // detached block features
};

struct MemoryProxy {
  std::size_t params = 0;
  std::size_t activations = 0;
  std::size_t total() const { return params + activations; }
};

// One gradient-isolated stage: block layers, its auxiliary head and the
// optimizer state for both.
class LocalModule {
 public:
  LocalModule(std::size_t stage_index, bool is_final, int nominal_aux_depth,
              std::vector<DenseLayer> block, AuxHead aux,
              const ModelHyper& hyper);

  // Tensors are shared handles; copying would alias parameters across
  // modules. Use clone().
  LocalModule(const LocalModule&) = delete;
  LocalModule& operator=(const LocalModule&) = delete;
  LocalModule(LocalModule&&) noexcept = default;
  LocalModule& operator=(LocalModule&&) noexcept = default;

  std::size_t stage_index() const { return stage_index_; }
  bool is_final() const { return is_final_; }
  // Depth given by AuxDepth for this stage. The final stage reports it but
  // realizes a passthrough head.
  int aux_depth() const { return nominal_aux_depth_; }
  std::size_t input_width() const { return block_.front().in_width(); }
  std::size_t output_width() const { return block_.back().out_width(); }

  const std::vector<DenseLayer>& block() const { return block_; }
  const AuxHead& aux() const { return aux_; }
  const OptimizerState& block_optimizer() const { return block_opt_; }
  const OptimizerState& aux_optimizer() const { return aux_opt_; }
  const LrSchedule& schedule() const { return schedule_; }

  std::vector<Tensor> block_parameters() const;
  std::vector<Tensor> aux_parameters() const;
  std::size_t block_param_count() const;
  std::size_t aux_param_count() const;

  Tensor block_forward(GradTape& tape, const Tensor& x) const;
  // Untracked block forward.
  Tensor infer(const Tensor& x) const;
  Tensor aux_forward(GradTape& tape, const Tensor& features) const;

  // Block forward on a fresh tape. With track_input the input is copied
  // with gradient tracking so its gradient can be sent upstream.
  ForwardPass forward(const Tensor& x_in, bool track_input = false) const;
  // Aux head, local cross-entropy and backward into block and aux
  // parameters. Returns the loss value.
  double local_backward(ForwardPass& pass, std::span<const int> labels,
                        LocalTimings* timings = nullptr);
  // Steps block and aux parameters at the current cosine rate.
  void apply_local_update();
  // Steps block parameters only (end-to-end gradients).
  void apply_block_update();
  double current_lr() const;

  // forward -> capture detached output -> local_backward ->
  // apply_local_update. Requires a detached input.
  LocalStepResult local_loss_and_update(const Tensor& x_in,
                                        std::span<const int> labels);

  // Deep copy of parameters and optimizer state.
  LocalModule clone() const;

 private:
  std::size_t stage_index_;
  bool is_final_;
  int nominal_aux_depth_;
  std::vector<DenseLayer> block_;
  AuxHead aux_;
  OptimizerState block_opt_;
  OptimizerState aux_opt_;
  LrSchedule schedule_;
};

std::vector<LocalModule> BuildModules(const NetworkSpec& spec,
                                      const PartitionPlan& plan,
                                      const ModelHyper& hyper);

std::vector<LocalModule> CloneModules(std::span<const LocalModule> modules);

// Untracked composition of all blocks; the final block emits logits.
Tensor NetworkForward(std::span<const LocalModule> modules, const Tensor& x);

// Analytic float counts for one forward+backward of block plus aux head:
// the input, each layer's pre-activation output and, for ReLU layers, the
// activation output. With include_aux false the aux head is left out (a
// stage trained by end-to-end gradients).
MemoryProxy MemoryFootprint(const LocalModule& module, std::size_t batch_size,
                            bool include_aux = true);
// Whole unpartitioned network without auxiliary heads.
MemoryProxy NetworkFootprint(const NetworkSpec& spec, std::size_t batch_size);

}  // namespace locopipe

#endif  // LOCOPIPE_MODEL_HPP_
