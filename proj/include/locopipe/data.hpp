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
#ifndef LOCOPIPE_DATA_HPP_
#define LOCOPIPE_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "locopipe/tensor.hpp"

namespace locopipe {

struct Dataset {
  Tensor features;  // [N x D]
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  void Validate() const;
};

// Gaussian clusters, one per class, centred on an integer lattice with
// spacing kBlobSpacing. Class c sits at the base-b digits of c, where b is
// the smallest base with b^dim >= classes. Samples are class-major.
inline constexpr double kBlobSpacing = 3.0;
Dataset GenBlobs(std::size_t n_per_class, int classes, std::size_t dim,
                 double spread, std::uint64_t seed);

// Two interleaved Archimedean spirals. Sample i of class c has
//   theta = pi/2 + 3*pi*i/n,  r = theta / (2*pi),
//   point = (-1)^c * (r*cos(theta), r*sin(theta)) + noise * (z1, z2)
// with z1, z2 standard normal draws.
Dataset GenSpirals(std::size_t n_per_class, double noise, std::uint64_t seed);

// IDX (MNIST-style) files: big-endian u32 magic and dimensions, then
// unsigned-byte payload. Pixels are scaled by 1/255.
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
Dataset ParseIdx(std::span<const std::uint8_t> images,
                 std::span<const std::uint8_t> labels);
Dataset LoadIdx(const std::filesystem::path& images_path,
                const std::filesystem::path& labels_path);

struct Batch {
  std::int64_t batch_id = 0;
  std::vector<std::size_t> indices;
  Tensor features;
  std::vector<int> labels;
};

// One epoch over a dataset in ceil(N / batch_size) batches; the last one
// may be short. The dataset must outlive the iterator.
class BatchIterator {
 public:
  BatchIterator(const Dataset& ds, std::size_t batch_size, bool shuffle,
                std::uint64_t seed);

  std::optional<Batch> next();
  std::size_t num_batches() const;
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const Dataset* ds_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::int64_t next_id_ = 0;
};

BatchIterator Batches(const Dataset& ds, std::size_t batch_size, bool shuffle,
                      std::uint64_t seed);

// Gathers rows of `ds` into a batch.
Batch MakeBatch(const Dataset& ds, std::span<const std::size_t> indices,
                std::int64_t batch_id);

}  // namespace locopipe

#endif  // LOCOPIPE_DATA_HPP_
