// Copyright 2026 The TinyInfer Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TINYINFER_THREAD_POOL_HPP_
#define TINYINFER_THREAD_POOL_HPP_

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "tinyinfer/error.hpp"

namespace tinyinfer {

// Fixed-size pool that runs one data-parallel loop at a time. Work is split
// into `workers` contiguous chunks, chunk 0 on the calling thread, so the
// assignment of items to threads never affects what each item computes.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) : workers_(workers) {
    Check(workers >= 1, ErrorCode::kArgument, "worker count must be >= 1");
    threads_.reserve(static_cast<std::size_t>(workers - 1));
    for (int i = 1; i < workers; ++i) {
      threads_.emplace_back([this, i] { WorkerLoop(i); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  // Calls fn(begin, end) over a partition of [0, count). Blocks until done.
  template <typename F>
  void ParallelFor(std::size_t count, F&& fn) {
    if (count == 0) return;
    if (workers_ == 1 || count == 1) {
      fn(std::size_t{0}, count);
      return;
    }
    using Fn = std::remove_reference_t<F>;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ctx_ = const_cast<void*>(static_cast<const void*>(&fn));
      invoke_ = [](void* ctx, std::size_t b, std::size_t e) { (*static_cast<Fn*>(ctx))(b, e); };
      count_ = count;
      pending_ = workers_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    std::exception_ptr local;
    try {
      RunChunk(0);
    } catch (...) {
      local = std::current_exception();
    }
    std::unique_lock<std::mutex> lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    if (local) std::rethrow_exception(local);
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void RunChunk(int chunk) {
    const std::size_t w = static_cast<std::size_t>(workers_);
    const std::size_t k = static_cast<std::size_t>(chunk);
    const std::size_t begin = count_ * k / w;
    const std::size_t end = count_ * (k + 1) / w;
    if (begin < end) invoke_(ctx_, begin, end);
  }

  void WorkerLoop(int chunk) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      std::exception_ptr err;
      try {
        RunChunk(chunk);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (err && !error_) error_ = err;
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  bool stop_ = false;
  std::size_t generation_ = 0;
  int pending_ = 0;
  std::size_t count_ = 0;
  void* ctx_ = nullptr;
  void (*invoke_)(void*, std::size_t, std::size_t) = nullptr;
  std::exception_ptr error_;
};

// Runs fn over [0, count) on the pool, or inline when pool is null.
template <typename F>
void ParallelFor(ThreadPool* pool, std::size_t count, F&& fn) {
  if (pool == nullptr) {
    if (count > 0) fn(std::size_t{0}, count);
    return;
  }
  pool->ParallelFor(count, std::forward<F>(fn));
}

}  // namespace tinyinfer

#endif  // TINYINFER_THREAD_POOL_HPP_
