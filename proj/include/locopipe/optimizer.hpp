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
#ifndef LOCOPIPE_OPTIMIZER_HPP_
#define LOCOPIPE_OPTIMIZER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "locopipe/tensor.hpp"

namespace locopipe {

// Momentum state for SGD with Nesterov momentum and coupled L2 decay.
// Buffers are positional: buffer i belongs to the i-th registered parameter.
struct OptimizerState {
  std::vector<std::vector<double>> momentum_buffers;
  double mu = 0.9;
  double weight_decay = 1e-4;
  std::int64_t step_count = 0;

  static OptimizerState ForParams(std::span<const Tensor> params, double mu,
                                  double weight_decay);
};

struct LrSchedule {
  double lr0 = 0.01;
  double lr_min = 0.0;
  std::int64_t total_steps = 1;
};

// For each parameter with gradient g:
//   g' = g + weight_decay * theta
//   v  = mu * v + g'
//   theta -= lr * (g' + mu * v)
// then clears the gradient. Throws kMissingGradient before touching any
// parameter if one lacks a gradient.
void SgdNesterovStep(std::span<Tensor> params, OptimizerState& state,
                     double lr);

// Half-cosine from lr0 at step 0 to lr_min at total_steps.
double CosineLr(std::int64_t step, const LrSchedule& sched);

}  // namespace locopipe

#endif  // LOCOPIPE_OPTIMIZER_HPP_
