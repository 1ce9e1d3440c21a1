#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace scarecrow {

/// Multi-producer multi-consumer FIFO with a fixed capacity. When full, push
/// either evicts the oldest item (counted in dropped()) or waits for space.
template <class T>
class BoundedQueue {
 public:
  enum class Overflow { drop_oldest, block };

  explicit BoundedQueue(std::size_t capacity, Overflow overflow = Overflow::drop_oldest)
      : capacity_(capacity), overflow_(overflow) {
    if (capacity == 0) throw std::invalid_argument("queue capacity must be positive");
  }

  /// False when the queue is closed and the item was discarded.
  bool push(T item) {
    std::unique_lock lock(mu_);
    if (overflow_ == Overflow::block) {
      not_full_.wait(lock, [this] { return closed_ || items_.size() < capacity_; });
    }
    if (closed_) return false;
    if (items_.size() >= capacity_) {
      items_.pop_front();
      ++dropped_;
    }
    items_.push_back(std::move(item));
    lock.unlock();
    not_empty_.notify_one();
    return true;
  }

  /// Waits for an item; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [this] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    lock.unlock();
    not_full_.notify_one();
    return item;
  }

  /// Pending items stay poppable; further pushes are rejected.
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  Overflow overflow_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

}  // namespace scarecrow
