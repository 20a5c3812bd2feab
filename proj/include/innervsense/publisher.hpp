#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace innervsense {

inline constexpr std::size_t kDefaultSubscriberQueue = 1024;

// Bounded per-subscriber queue. When full, the oldest item is dropped and the
// drop counter incremented, so a slow consumer never blocks the producer.
template <class T>
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

  void push(const T& item) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      if (queue_.size() == capacity_) {
        queue_.pop_front();
        ++drops_;
      }
      queue_.push_back(item);
      ++delivered_;
    }
    cv_.notify_one();
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mu_);
    if (queue_.empty()) return std::nullopt;
    T item = std::move(queue_.front());
    queue_.pop_front();
    return item;
  }

  // Waits up to `timeout`; returns nullopt on timeout or once closed and drained.
  template <class Rep, class Period>
  std::optional<T> pop_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    T item = std::move(queue_.front());
    queue_.pop_front();
    return item;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }
  std::uint64_t drops() const {
    std::lock_guard lock(mu_);
    return drops_;
  }
  std::uint64_t delivered() const {
    std::lock_guard lock(mu_);
    return delivered_;
  }
  std::size_t pending() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
  std::uint64_t drops_ = 0;
  std::uint64_t delivered_ = 0;
  bool closed_ = false;
};

// Fan-out to every currently connected subscriber, in publish order. A
// subscriber is disconnected when its handle is released or closed.
template <class T>
class Publisher {
 public:
  std::shared_ptr<Subscription<T>> subscribe(std::size_t capacity = kDefaultSubscriberQueue) {
    auto sub = std::make_shared<Subscription<T>>(capacity);
    std::lock_guard lock(mu_);
    subs_.push_back(sub);
    return sub;
  }

  void publish(const T& item) {
    std::lock_guard lock(mu_);
    std::erase_if(subs_, [&](const std::weak_ptr<Subscription<T>>& w) {
      auto s = w.lock();
      if (!s || s->closed()) return true;
      s->push(item);
      return false;
    });
    ++published_;
  }

  void close_all() {
    std::lock_guard lock(mu_);
    for (auto& w : subs_) {
      if (auto s = w.lock()) s->close();
    }
    subs_.clear();
  }

  std::size_t subscriber_count() const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(std::count_if(subs_.begin(), subs_.end(), [](const auto& w) {
      auto s = w.lock();
      return s && !s->closed();
    }));
  }

  std::uint64_t published() const {
    std::lock_guard lock(mu_);
    return published_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::weak_ptr<Subscription<T>>> subs_;
  std::uint64_t published_ = 0;
};

}  // namespace innervsense
