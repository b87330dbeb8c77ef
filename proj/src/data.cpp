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
#include "locopipe/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "locopipe/error.hpp"

namespace locopipe {

void Dataset::Validate() const {
  if (labels.empty()) throw Error(ErrorCode::kInvalidArg, "empty dataset");
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::kCountMismatch, "feature rows != label count");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label " + std::to_string(y) + " outside class range");
    }
  }
}

Dataset GenBlobs(std::size_t n_per_class, int classes, std::size_t dim,
                 double spread, std::uint64_t seed) {
  if (n_per_class < 1 || classes < 1 || dim < 1 || !(spread >= 0.0)) {
    throw Error(ErrorCode::kInvalidArg,
                "blobs need positive counts and a non-negative spread");
  }
  std::size_t base = 1;
  auto capacity = [&](std::size_t b) {
    std::size_t c = 1;
    for (std::size_t d = 0; d < dim && c < static_cast<std::size_t>(classes);
         ++d)
      c *= b;
    return c;
  };
  while (capacity(base) < static_cast<std::size_t>(classes)) ++base;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = n_per_class * static_cast<std::size_t>(classes);
  std::vector<double> x(n * dim);
  std::vector<int> y(n);
  std::size_t row = 0;
  for (int c = 0; c < classes; ++c) {
    std::vector<double> mean(dim);
    std::size_t code = static_cast<std::size_t>(c);
    for (std::size_t d = 0; d < dim; ++d) {
      mean[d] = kBlobSpacing * static_cast<double>(code % base);
      code /= base;
    }
    for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double z = normal(rng);
        x[row * dim + d] = spread == 0.0 ? mean[d] : mean[d] + spread * z;
      }
      y[row] = c;
    }
  }
  return Dataset{Tensor({n, dim}, std::move(x)), std::move(y), classes};
}

Dataset GenSpirals(std::size_t n_per_class, double noise, std::uint64_t seed) {
  if (n_per_class < 1 || !(noise >= 0.0)) {
    throw Error(ErrorCode::kInvalidArg,
                "spirals need n_per_class >= 1 and noise >= 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = 2 * n_per_class;
  std::vector<double> x(n * 2);
  std::vector<int> y(n);
  for (int c = 0; c < 2; ++c) {
    const double sign = c == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::size_t row = static_cast<std::size_t>(c) * n_per_class + i;
      const double theta = std::numbers::pi / 2 +
                           3.0 * std::numbers::pi * static_cast<double>(i) /
                               static_cast<double>(n_per_class);
      const double r = theta / (2.0 * std::numbers::pi);
      const double nx = normal(rng);
      const double ny = normal(rng);
      x[row * 2] = sign * r * std::cos(theta) + noise * nx;
      x[row * 2 + 1] = sign * r * std::sin(theta) + noise * ny;
      y[row] = c;
    }
  }
  return Dataset{Tensor({n, 2}, std::move(x)), std::move(y), 2};
}

namespace {

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, const char* what)
      : bytes_(bytes), what_(what) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  std::string(what_) + " ends after " +
                      std::to_string(bytes_.size()) + " bytes");
    }
  }

  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

Dataset ParseIdx(std::span<const std::uint8_t> images,
                 std::span<const std::uint8_t> labels) {
  ByteReader img(images, "image file");
  ByteReader lab(labels, "label file");
  const std::uint32_t img_magic = img.u32();
  if (img_magic != kIdxImageMagic) {
    throw Error(ErrorCode::kBadMagic, "image magic " + std::to_string(img_magic));
  }
  const std::uint32_t lab_magic = lab.u32();
  if (lab_magic != kIdxLabelMagic) {
    throw Error(ErrorCode::kBadMagic, "label magic " + std::to_string(lab_magic));
  }
  const std::size_t n = img.u32();
  const std::size_t rows = img.u32();
  const std::size_t cols = img.u32();
  const std::size_t n_labels = lab.u32();
  if (n != n_labels) {
    throw Error(ErrorCode::kCountMismatch,
                std::to_string(n) + " images vs " + std::to_string(n_labels) +
                    " labels");
  }
  if (n == 0 || rows == 0 || cols == 0) {
    throw Error(ErrorCode::kInvalidArg, "IDX file holds no pixels");
  }
  const std::size_t dim = rows * cols;
  const auto pixels = img.take(n * dim);
  const auto label_bytes = lab.take(n);

  std::vector<double> x(n * dim);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = pixels[i] / 255.0;
  std::vector<int> y(label_bytes.begin(), label_bytes.end());
  const int classes = *std::max_element(y.begin(), y.end()) + 1;
  return Dataset{Tensor({n, dim}, std::move(x)), std::move(y), classes};
}

Dataset LoadIdx(const std::filesystem::path& images_path,
                const std::filesystem::path& labels_path) {
  const auto images = ReadFile(images_path);
  const auto labels = ReadFile(labels_path);
  return ParseIdx(images, labels);
}

BatchIterator::BatchIterator(const Dataset& ds, std::size_t batch_size,
                             bool shuffle, std::uint64_t seed)
    : ds_(&ds), batch_size_(batch_size), order_(ds.size()) {
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArg, "batch size must be >= 1");
  }
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

std::size_t BatchIterator::num_batches() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::optional<Batch> BatchIterator::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  std::span<const std::size_t> idx(order_.data() + cursor_, end - cursor_);
  cursor_ = end;
  return MakeBatch(*ds_, idx, next_id_++);
}

BatchIterator Batches(const Dataset& ds, std::size_t batch_size, bool shuffle,
                      std::uint64_t seed) {
  return BatchIterator(ds, batch_size, shuffle, seed);
}

Batch MakeBatch(const Dataset& ds, std::span<const std::size_t> indices,
                std::int64_t batch_id) {
  const std::size_t dim = ds.dim();
  std::vector<double> x(indices.size() * dim);
  std::vector<int> y(indices.size());
  const auto src = ds.features.data();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(indices[r] * dim),
                dim, x.begin() + static_cast<std::ptrdiff_t>(r * dim));
    y[r] = ds.labels[indices[r]];
  }
  Batch batch;
  batch.batch_id = batch_id;
  batch.indices.assign(indices.begin(), indices.end());
  batch.features = Tensor({indices.size(), dim}, std::move(x));
  batch.labels = std::move(y);
  return batch;
}

}  // namespace locopipe
