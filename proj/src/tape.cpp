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
#include "locopipe/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "locopipe/error.hpp"

namespace locopipe {

Tensor GradTape::record(Tensor output,
                        std::initializer_list<const Tensor*> inputs,
                        Adjoint adjoint) {
  const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                   [](const Tensor* t) { return t->track_grad(); });
  if (!tracked) return output;
  output.set_track_grad(true);
  nodes_.push_back(Node{output, std::move(adjoint)});
  return output;
}

Tensor GradTape::matmul(const Tensor& a, const Tensor& b) {
  Tensor out = MatMul(a, b);
  return record(out, {&a, &b},
                [a, b](std::span<const double> g) mutable {
                  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
                  const auto ad = a.data();
                  const auto bd = b.data();
                  if (a.track_grad()) {
                    auto ga = a.mutable_grad();
                    for (std::size_t i = 0; i < m; ++i)
                      for (std::size_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < n; ++j)
                          acc += g[i * n + j] * bd[p * n + j];
                        ga[i * k + p] += acc;
                      }
                  }
                  if (b.track_grad()) {
                    auto gb = b.mutable_grad();
                    for (std::size_t p = 0; p < k; ++p)
                      for (std::size_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < m; ++i)
                          acc += ad[i * k + p] * g[i * n + j];
                        gb[p * n + j] += acc;
                      }
                  }
                });
}

Tensor GradTape::relu(const Tensor& x) {
  Tensor out = Relu(x);
  return record(out, {&x}, [x](std::span<const double> g) mutable {
    auto gx = x.mutable_grad();
    const auto xd = x.data();
    // Subgradient at exactly zero is taken as 0.
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (xd[i] > 0.0) gx[i] += g[i];
  });
}

Tensor GradTape::add(const Tensor& a, const Tensor& b) {
  Tensor out = Add(a, b);
  return record(out, {&a, &b}, [a, b](std::span<const double> g) mutable {
    for (const Tensor* t : {&a, &b}) {
      if (!t->track_grad()) continue;
      auto gt = t->mutable_grad();
      for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g[i];
    }
  });
}

Tensor GradTape::bias_add(const Tensor& x, const Tensor& bias) {
  Tensor out = BiasAdd(x, bias);
  return record(out, {&x, &bias},
                [x, bias](std::span<const double> g) mutable {
                  if (x.track_grad()) {
                    auto gx = x.mutable_grad();
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                  }
                  if (bias.track_grad()) {
                    auto gb = bias.mutable_grad();
                    const std::size_t n = gb.size();
                    const std::size_t rows = g.size() / n;
                    for (std::size_t j = 0; j < n; ++j) {
                      double acc = 0.0;
                      for (std::size_t i = 0; i < rows; ++i) acc += g[i * n + j];
                      gb[j] += acc;
                    }
                  }
                });
}

Tensor GradTape::scale(const Tensor& x, double factor) {
  Tensor out = Scale(x, factor);
  return record(out, {&x}, [x, factor](std::span<const double> g) mutable {
    auto gx = x.mutable_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * g[i];
  });
}

Tensor GradTape::sum(const Tensor& x) {
  Tensor out = Sum(x);
  return record(out, {&x}, [x](std::span<const double> g) mutable {
    auto gx = x.mutable_grad();
    for (double& v : gx) v += g[0];
  });
}

Tensor GradTape::softmax_xent(const Tensor& logits,
                              std::span<const int> labels) {
  Tensor out = SoftmaxCrossEntropy(logits, labels);
  std::vector<int> owned(labels.begin(), labels.end());
  return record(
      out, {&logits},
      [logits, owned = std::move(owned)](std::span<const double> g) mutable {
        const std::size_t batch = logits.rows(), classes = logits.cols();
        const double coeff = g[0] / static_cast<double>(batch);
        auto gl = logits.mutable_grad();
        const auto ld = logits.data();
        for (std::size_t i = 0; i < batch; ++i) {
          const double* row = ld.data() + i * classes;
          const double peak = *std::max_element(row, row + classes);
          double denom = 0.0;
          for (std::size_t c = 0; c < classes; ++c)
            denom += std::exp(row[c] - peak);
          for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(row[c] - peak) / denom;
            const double onehot = static_cast<int>(c) == owned[i] ? 1.0 : 0.0;
            gl[i * classes + c] += coeff * (p - onehot);
          }
        }
      });
}

std::size_t GradTape::backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw Error(ErrorCode::kNotScalar,
                "backward needs a scalar loss, got " +
                    ShapeString(loss.shape()));
  }
  const double one = 1.0;
  return replay(loss, std::span<const double>(&one, 1));
}

std::size_t GradTape::backward(const Tensor& output, const Tensor& seed) {
  if (seed.numel() != output.numel()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "backward seed " + ShapeString(seed.shape()) +
                    " does not match output " + ShapeString(output.shape()));
  }
  return replay(output, seed.data());
}

std::size_t GradTape::replay(const Tensor& output,
                             std::span<const double> seed) {
  if (nodes_.empty()) {
    throw Error(ErrorCode::kEmptyTape, "backward on an empty tape");
  }
  Tensor root = output;
  auto root_grad = root.mutable_grad();
  for (std::size_t i = 0; i < seed.size(); ++i) root_grad[i] += seed[i];

  std::size_t executed = 0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    // Nodes whose output received no gradient are off the path to the root.
    if (!it->output.has_grad()) continue;
    it->adjoint(it->output.grad());
    ++executed;
  }
  nodes_.clear();
  return executed;
}

}  // namespace locopipe
