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
#ifndef LOCOPIPE_TAPE_HPP_
#define LOCOPIPE_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "locopipe/tensor.hpp"

namespace locopipe {

// Reverse-mode gradient tape. Each recording method computes the forward
// value with the untracked primitive and, when any input tracks gradients,
// appends a node holding the inputs, the output and the adjoint closure.
//
// A tape is a single-threaded unit of work. Nodes are appended in execution
// order, so the vector is already topologically sorted.
class GradTape {
 public:
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor relu(const Tensor& x);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor bias_add(const Tensor& x, const Tensor& bias);
  Tensor scale(const Tensor& x, double factor);
  Tensor sum(const Tensor& x);
  Tensor softmax_xent(const Tensor& logits, std::span<const int> labels);

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Gradients
  // accumulate into every tracked tensor reachable from `loss`. The tape is
  // consumed. Returns the number of adjoint closures executed.
  std::size_t backward(const Tensor& loss);
  // Same, seeding `output` with an upstream gradient of equal shape.
  std::size_t backward(const Tensor& output, const Tensor& seed);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear() { nodes_.clear(); }

 private:
  using Adjoint = std::function<void(std::span<const double> out_grad)>;
  struct Node {
    Tensor output;
    Adjoint adjoint;
  };

  Tensor record(Tensor output, std::initializer_list<const Tensor*> inputs,
                Adjoint adjoint);
  std::size_t replay(const Tensor& output, std::span<const double> seed);

  std::vector<Node> nodes_;
};

}  // namespace locopipe

#endif  // LOCOPIPE_TAPE_HPP_
