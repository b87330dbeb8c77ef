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
#include "locopipe/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "locopipe/error.hpp"

namespace locopipe {

OptimizerState OptimizerState::ForParams(std::span<const Tensor> params,
                                         double mu, double weight_decay) {
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw Error(ErrorCode::kInvalidArg,
                "momentum must lie in [0, 1), got " + std::to_string(mu));
  }
  if (!(weight_decay >= 0.0)) {
    throw Error(ErrorCode::kInvalidArg, "weight decay must be >= 0");
  }
  OptimizerState state;
  state.mu = mu;
  state.weight_decay = weight_decay;
  state.momentum_buffers.reserve(params.size());
  for (const Tensor& p : params) {
    state.momentum_buffers.emplace_back(p.numel(), 0.0);
  }
  return state;
}

void SgdNesterovStep(std::span<Tensor> params, OptimizerState& state,
                     double lr) {
  if (params.size() != state.momentum_buffers.size()) {
    throw Error(ErrorCode::kConfigMismatch,
                "optimizer holds " +
                    std::to_string(state.momentum_buffers.size()) +
                    " buffers for " + std::to_string(params.size()) +
                    " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      throw Error(ErrorCode::kMissingGradient,
                  "parameter " + std::to_string(i) + " has no gradient");
    }
    if (state.momentum_buffers[i].size() != params[i].numel()) {
      throw Error(ErrorCode::kConfigMismatch,
                  "momentum buffer " + std::to_string(i) + " shape mismatch");
    }
  }
  const double mu = state.mu;
  const double wd = state.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].mutable_data();
    const auto g = params[i].grad();
    auto& v = state.momentum_buffers[i];
    for (std::size_t e = 0; e < theta.size(); ++e) {
      const double gd = g[e] + wd * theta[e];
      v[e] = mu * v[e] + gd;
      theta[e] -= lr * (gd + mu * v[e]);
    }
    CheckFinite(params[i], "sgd_nesterov_step");
    params[i].clear_grad();
  }
  ++state.step_count;
}

double CosineLr(std::int64_t step, const LrSchedule& sched) {
  if (sched.total_steps < 1) {
    throw Error(ErrorCode::kInvalidArg, "total_steps must be >= 1");
  }
  if (step < 0 || step > sched.total_steps) {
    throw Error(ErrorCode::kStepOutOfRange,
                "step " + std::to_string(step) + " outside [0, " +
                    std::to_string(sched.total_steps) + "]");
  }
  const double phase = std::numbers::pi * static_cast<double>(step) /
                       static_cast<double>(sched.total_steps);
  return sched.lr_min +
         0.5 * (sched.lr0 - sched.lr_min) * (1.0 + std::cos(phase));
}

}  // namespace locopipe
