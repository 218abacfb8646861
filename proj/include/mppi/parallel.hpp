#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mppi {

/// Persistent worker pool for index-parallel loops. Each call to
/// parallel_for splits [0, n) into one contiguous chunk per worker, so a
/// given index is always processed exactly once; results written per index
/// are identical to a sequential run regardless of the thread count.
class ThreadPool {
 public:
  /// threads == 0 picks the hardware concurrency; threads == 1 runs inline.
  explicit ThreadPool(int threads = 0) {
    if (threads <= 0) {
      threads = static_cast<int>(std::thread::hardware_concurrency());
      if (threads <= 0) threads = 1;
    }
    thread_count_ = threads;
    for (int i = 1; i < threads; ++i) {
      workers_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      shutdown_ = true;
    }
    start_cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const { return thread_count_; }

  void parallel_for(int n, const std::function<void(int)>& body) {
    if (n <= 0) return;
    if (thread_count_ == 1 || n == 1) {
      for (int i = 0; i < n; ++i) body(i);
      return;
    }
    {
      std::unique_lock<std::mutex> lock(mutex_);
      body_ = &body;
      n_ = n;
      pending_ = static_cast<int>(workers_.size());
      ++generation_;
    }
    start_cv_.notify_all();
    run_chunk(0);
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
  }

 private:
  void run_chunk(int worker) {
    const int chunk = (n_ + thread_count_ - 1) / thread_count_;
    const int begin = worker * chunk;
    const int end = std::min(n_, begin + chunk);
    for (int i = begin; i < end; ++i) (*body_)(i);
  }

  void worker_loop(int worker) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        start_cv_.wait(lock, [this, seen] { return shutdown_ || generation_ != seen; });
        if (shutdown_) return;
        seen = generation_;
      }
      run_chunk(worker);
      {
        std::unique_lock<std::mutex> lock(mutex_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  int thread_count_ = 1;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* body_ = nullptr;
  int n_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  bool shutdown_ = false;
};

}  // namespace mppi
