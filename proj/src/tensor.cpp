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
#include "locopipe/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "locopipe/error.hpp"

namespace locopipe {

std::size_t ShapeNumel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool track_grad)
    : Tensor("tensor", std::move(shape), std::move(data)) {
  impl_->track_grad = track_grad;
}

Tensor::Tensor(const char* op, Shape shape, std::vector<double> data)
    : impl_(std::make_shared<Storage>()) {
  if (shape.empty() ||
      std::any_of(shape.begin(), shape.end(),
                  [](std::size_t d) { return d == 0; })) {
    throw Error(ErrorCode::kDimensionMismatch,
                "tensor dimensions must be positive, got " + ShapeString(shape));
  }
  if (ShapeNumel(shape) != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "shape " + ShapeString(shape) + " does not match " +
                    std::to_string(data.size()) + " values");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  CheckFinite(*this, op);
}

Tensor Tensor::FromOp(const char* op, Shape shape, std::vector<double> data) {
  return Tensor(op, std::move(shape), std::move(data));
}

Tensor Tensor::Zeros(Shape shape, bool track_grad) {
  const std::size_t n = ShapeNumel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), track_grad);
}

Tensor Tensor::Scalar(double value, bool track_grad) {
  return Tensor({1}, {value}, track_grad);
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> data, bool track_grad) {
  return Tensor({rows, cols}, std::move(data), track_grad);
}

std::size_t Tensor::rows() const {
  return rank() == 2 ? impl_->shape[0] : 1;
}

std::size_t Tensor::cols() const { return impl_->shape.back(); }

double Tensor::at(std::size_t r, std::size_t c) const {
  return impl_->data[r * cols() + c];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw Error(ErrorCode::kNotScalar,
                "item() on tensor of shape " + ShapeString(shape()));
  }
  return impl_->data[0];
}

std::span<const double> Tensor::grad() const {
  if (!impl_->grad) return {};
  return *impl_->grad;
}

std::span<double> Tensor::mutable_grad() const {
  if (!impl_->grad) impl_->grad.emplace(impl_->data.size(), 0.0);
  return *impl_->grad;
}

Tensor Tensor::detach() const {
  return Tensor(impl_->shape, impl_->data, false);
}

Tensor Tensor::clone() const {
  return Tensor(impl_->shape, impl_->data, impl_->track_grad);
}

bool Tensor::all_finite() const {
  return std::all_of(impl_->data.begin(), impl_->data.end(),
                     [](double v) { return std::isfinite(v); });
}

void CheckFinite(const Tensor& t, const char* op) {
  if (!t.all_finite()) {
    throw Error(ErrorCode::kNonFinite,
                std::string(op) + " produced a non-finite value");
  }
}

namespace {

void RequireRank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + " expects a matrix, got " +
                    ShapeString(t.shape()));
  }
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank2(a, "matmul");
  RequireRank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matmul " + ShapeString(a.shape()) + " . " +
                    ShapeString(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      const double* brow = bd.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return Tensor::FromOp("matmul", {m, n}, std::move(out));
}

Tensor Relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::FromOp("relu", x.shape(), std::move(out));
}

Tensor Add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "add " + ShapeString(a.shape()) + " + " +
                    ShapeString(b.shape()));
  }
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor::FromOp("add", a.shape(), std::move(out));
}

Tensor BiasAdd(const Tensor& x, const Tensor& bias) {
  RequireRank2(x, "bias_add");
  const std::size_t n = x.cols();
  if (bias.numel() != n || (bias.rank() == 2 && bias.rows() != 1)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "bias_add " + ShapeString(x.shape()) + " + " +
                    ShapeString(bias.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias[j];
  }
  return Tensor::FromOp("bias_add", x.shape(), std::move(out));
}

Tensor Scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  return Tensor::FromOp("scale", x.shape(), std::move(out));
}

Tensor Sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return Tensor::FromOp("sum", {1}, {total});
}

Tensor SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> labels) {
  RequireRank2(logits, "softmax_xent");
  const std::size_t batch = logits.rows(), classes = logits.cols();
  if (labels.size() != batch) {
    throw Error(ErrorCode::kDimensionMismatch,
                "softmax_xent: " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(batch) + " rows");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label " + std::to_string(label) + " not in [0, " +
                      std::to_string(classes) + ")");
    }
    const double* row = logits.data().data() + i * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - peak);
    total += std::log(denom) - (row[label] - peak);
  }
  return Tensor::FromOp("softmax_xent", {1},
                        {total / static_cast<double>(batch)});
}

std::vector<int> ArgMaxRows(const Tensor& logits) {
  std::vector<int> out(logits.rows());
  const std::size_t cols = logits.cols();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* row = logits.data().data() + i * cols;
    out[i] = static_cast<int>(std::max_element(row, row + cols) - row);
  }
  return out;
}

}  // namespace locopipe
