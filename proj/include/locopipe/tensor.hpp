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
#ifndef LOCOPIPE_TENSOR_HPP_
#define LOCOPIPE_TENSOR_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace locopipe {

using Shape = std::vector<std::size_t>;

std::size_t ShapeNumel(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense row-major tensor of doubles. Copies share storage (handle
// semantics); use clone() or detach() for an independent value.
//
// Only 1-D and 2-D shapes are used by the library. Every stored value is
// finite: ops check their outputs and throw kNonFinite otherwise.
class Tensor {
 public:
  // Null handle; valid() is false.
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool track_grad = false);

  static Tensor Zeros(Shape shape, bool track_grad = false);
  static Tensor Scalar(double value, bool track_grad = false);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data, bool track_grad = false);
  // Result of primitive `op`; a non-finite value raises kNonFinite naming op.
  static Tensor FromOp(const char* op, Shape shape, std::vector<double> data);

  bool valid() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool track_grad() const { return impl_->track_grad; }
  void set_track_grad(bool on) { impl_->track_grad = on; }

  bool has_grad() const { return impl_->grad.has_value(); }
  std::span<const double> grad() const;
  // Allocates a zero gradient if absent.
  std::span<double> mutable_grad() const;
  void clear_grad() { impl_->grad.reset(); }

  // Deep copy without gradient tracking; this is what crosses a stage
  // boundary.
  Tensor detach() const;
  // Deep copy that keeps the tracking flag but drops any gradient.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  bool all_finite() const;

 private:
  struct Storage {
    Shape shape;
    std::vector<double> data;
    std::optional<std::vector<double>> grad;
    bool track_grad = false;
  };
  Tensor(const char* op, Shape shape, std::vector<double> data);

  std::shared_ptr<Storage> impl_;
};

// Throws kNonFinite naming `op` if any element is NaN or infinite.
void CheckFinite(const Tensor& t, const char* op);

// Untracked primitives. GradTape wraps each of these and records an adjoint.
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Relu(const Tensor& x);
Tensor Add(const Tensor& a, const Tensor& b);
// [B x n] + [n], broadcast over rows.
Tensor BiasAdd(const Tensor& x, const Tensor& bias);
Tensor Scale(const Tensor& x, double factor);
Tensor Sum(const Tensor& x);
// Mean over rows of -log softmax(logits)[label].
Tensor SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> labels);

// Row-wise argmax, used for accuracy.
std::vector<int> ArgMaxRows(const Tensor& logits);

}  // namespace locopipe

#endif  // LOCOPIPE_TENSOR_HPP_
