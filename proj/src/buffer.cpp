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
#include "locopipe/buffer.hpp"

#include <algorithm>
#include <string>

#include "locopipe/error.hpp"

namespace locopipe {

StageBuffer::StageBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1) {
    throw Error(ErrorCode::kInvalidArg, "buffer capacity must be >= 1");
  }
}

void StageBuffer::push(BufferSlot slot) {
  if (!slot.features.valid() || slot.features.track_grad()) {
    throw Error(ErrorCode::kInvalidArg,
                "buffer slots carry detached features only");
  }
  if (slot.features.rows() != slot.labels.size()) {
    throw Error(ErrorCode::kCountMismatch,
                "slot has " + std::to_string(slot.features.rows()) +
                    " rows and " + std::to_string(slot.labels.size()) +
                    " labels");
  }
  std::unique_lock lock(mu_);
  if (closed_) {
    throw Error(ErrorCode::kPushAfterClose,
                "push of batch " + std::to_string(slot.batch_id));
  }
  not_full_.wait(lock, [&] { return closed_ || queue_.size() < capacity_; });
  if (closed_) {
    throw Error(ErrorCode::kPushAfterClose,
                "buffer closed while batch " + std::to_string(slot.batch_id) +
                    " waited for space");
  }
  queue_.push_back(std::move(slot));
  high_water_ = std::max(high_water_, queue_.size());
  lock.unlock();
  not_empty_.notify_one();
}

std::optional<PoppedSlot> StageBuffer::pop() {
  std::unique_lock lock(mu_);
  not_empty_.wait(lock, [&] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  PoppedSlot out;
  out.slot = std::move(queue_.front());
  queue_.pop_front();
  // Read under the lock: the producer cannot get past its next blocked
  // push until this pop releases space.
  const std::int64_t produced =
      std::max(produced_.load(), out.slot.batch_id);
  out.staleness = produced - out.slot.batch_id;
  lock.unlock();
  not_full_.notify_one();
  return out;
}

bool StageBuffer::can_push() const {
  std::lock_guard lock(mu_);
  return !closed_ && queue_.size() < capacity_;
}

bool StageBuffer::can_pop() const {
  std::lock_guard lock(mu_);
  return !queue_.empty();
}

void StageBuffer::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  not_full_.notify_all();
  not_empty_.notify_all();
}

void StageBuffer::cancel() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    queue_.clear();
  }
  not_full_.notify_all();
  not_empty_.notify_all();
}

void StageBuffer::note_produced(std::int64_t batch_id) {
  std::int64_t prev = produced_.load();
  while (prev < batch_id && !produced_.compare_exchange_weak(prev, batch_id)) {
  }
}

std::size_t StageBuffer::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

bool StageBuffer::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t StageBuffer::high_water_mark() const {
  std::lock_guard lock(mu_);
  return high_water_;
}

}  // namespace locopipe
