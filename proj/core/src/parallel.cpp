// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace vgru {

namespace {
std::atomic<int> thread_override{0};
}

int max_threads() {
  static const int cached = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    const char* env = std::getenv("VGRU_THREADS");
    if (env) {
      int v = std::atoi(env);
      if (v > 0) return v < hw ? v : hw;
    }
    return hw;
  }();
  int ov = thread_override.load(std::memory_order_relaxed);
  return ov > 0 ? (ov < cached ? ov : cached) : cached;
}

void set_thread_override(int n) {
  thread_override.store(n, std::memory_order_relaxed);
}

namespace {

// Pool of hardware_threads-1 helpers; the caller acts as one more worker.
class Pool {
 public:
  static Pool& instance() {
    static Pool p;
    return p;
  }

  void run(std::size_t n, std::size_t chunks,
           const std::function<void(std::size_t, std::size_t)>& fn) {
    std::lock_guard<std::mutex> exclusive(run_mu_);
    std::unique_lock<std::mutex> lk(mu_);
    n_ = n;
    chunks_ = chunks;
    fn_ = &fn;
    next_.store(0, std::memory_order_relaxed);
    pending_ = static_cast<int>(helpers_.size());
    ++generation_;
    cv_work_.notify_all();
    lk.unlock();

    work();  // caller participates

    lk.lock();
    cv_done_.wait(lk, [&] { return pending_ == 0; });
    fn_ = nullptr;
  }

 private:
  Pool() {
    int helpers = static_cast<int>(std::thread::hardware_concurrency()) - 1;
    const char* env = std::getenv("VGRU_THREADS");
    if (env) {
      int v = std::atoi(env);
      if (v > 0 && v - 1 < helpers) helpers = v - 1;
    }
    for (int i = 0; i < helpers; ++i) {
      helpers_.emplace_back([this] { helper_loop(); });
    }
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      cv_work_.notify_all();
    }
    for (auto& t : helpers_) t.join();
  }

  void helper_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> lk(mu_);
      cv_work_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      lk.unlock();

      work();

      lk.lock();
      if (--pending_ == 0) cv_done_.notify_all();
    }
  }

  void work() {
    const auto fn = fn_;
    if (!fn) return;
    const std::size_t n = n_, chunks = chunks_;
    const std::size_t base = n / chunks, rem = n % chunks;
    for (;;) {
      std::size_t c = next_.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) break;
      // chunk c covers [lo, hi); the first `rem` chunks take one extra index
      std::size_t lo = c * base + (c < rem ? c : rem);
      std::size_t hi = lo + base + (c < rem ? 1 : 0);
      if (lo < hi) (*fn)(lo, hi);
    }
  }

  std::vector<std::thread> helpers_;
  std::mutex run_mu_;
  std::mutex mu_;
  std::condition_variable cv_work_, cv_done_;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;

  std::size_t n_ = 0, chunks_ = 0;
  const std::function<void(std::size_t, std::size_t)>* fn_ = nullptr;
  std::atomic<std::size_t> next_{0};
};

thread_local bool in_parallel_region = false;

}  // namespace

void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = max_threads();
  if (workers <= 1 || n <= grain || in_parallel_region) {
    fn(0, n);
    return;
  }
  std::size_t chunks = static_cast<std::size_t>(workers);
  if (grain > 0) {
    std::size_t max_chunks = (n + grain - 1) / grain;
    if (chunks > max_chunks) chunks = max_chunks;
  }
  if (chunks <= 1) {
    fn(0, n);
    return;
  }
  std::function<void(std::size_t, std::size_t)> wrapped =
      [&fn](std::size_t lo, std::size_t hi) {
        in_parallel_region = true;
        fn(lo, hi);
        in_parallel_region = false;
      };
  in_parallel_region = true;
  Pool::instance().run(n, chunks, wrapped);
  in_parallel_region = false;
}

}  // namespace vgru
