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
#ifndef LOCOPIPE_BUFFER_HPP_
#define LOCOPIPE_BUFFER_HPP_

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "locopipe/tensor.hpp"

namespace locopipe {

// Detached features and their labels travelling between stages.
struct BufferSlot {
  std::int64_t batch_id = 0;
  Tensor features;
  std::vector<int> labels;
};

struct PoppedSlot {
  BufferSlot slot;
  // Latest batch the producer had finished forwarding when this slot was
  // popped, minus this slot's batch id.
  std::int64_t staleness = 0;
};

// Bounded blocking FIFO between one producer stage and one consumer stage.
// push() blocks while the queue holds `capacity` slots; pop() blocks while
// it is empty and open, and returns nullopt once it is closed and drained.
class StageBuffer {
 public:
  explicit StageBuffer(std::size_t capacity);

  StageBuffer(const StageBuffer&) = delete;
  StageBuffer& operator=(const StageBuffer&) = delete;

  // Throws kPushAfterClose if the buffer is (or becomes, while waiting)
  // closed.
  void push(BufferSlot slot);
  std::optional<PoppedSlot> pop();

  // Non-blocking variants for the single-threaded scheduler.
  bool can_push() const;
  bool can_pop() const;

  // No further pushes; pending slots still drain.
  void close();
  // Close and drop pending slots; used to unwind after a worker failure.
  void cancel();

  // Called by the producer after computing batch `batch_id`, before it
  // pushes that batch.
  void note_produced(std::int64_t batch_id);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  bool closed() const;
  std::size_t high_water_mark() const;

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<BufferSlot> queue_;
  bool closed_ = false;
  std::size_t high_water_ = 0;
  std::atomic<std::int64_t> produced_{-1};
};

}  // namespace locopipe

#endif  // LOCOPIPE_BUFFER_HPP_
