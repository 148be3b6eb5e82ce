#pragma once

// Deterministic shared-memory parallelism helpers.
//
// Reductions are always evaluated over fixed-size chunks whose partial sums
// are combined sequentially, so results are bitwise identical for any thread
// count (including 1).  That property is load-bearing: the test suite checks
// solver output does not depend on --threads.  Within a chunk, terms are
// spread over eight accumulator lanes by their index offset — again a fixed
// layout — which breaks the add-latency dependence chain that a plain
// sequential sum would serialise on.

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace schwarz_inpaint::parallel {

inline int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

namespace detail {

// Minimal long-lived pool.  run() executes the job on every worker plus the
// calling thread and returns once all of them are done.
class ThreadPool {
 public:
  explicit ThreadPool(int workers) {
    for (int i = 0; i < workers; ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return static_cast<int>(threads_.size()); }

  void run(const std::function<void()>& job) {
    if (threads_.empty()) {
      job();
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &job;
      pending_ = static_cast<int>(threads_.size());
      ++generation_;
    }
    cv_.notify_all();
    job();
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void()>* job = nullptr;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stopping_) return;
        job = job_;
      }
      if (job) (*job)();
      {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void()>* job_ = nullptr;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stopping_ = false;
};

inline int& configured_threads() {
  static int count = 0;  // 0 = use hardware_threads()
  return count;
}

inline std::unique_ptr<ThreadPool>& pool_slot() {
  static std::unique_ptr<ThreadPool> pool;
  return pool;
}

}  // namespace detail

// Sets the global worker count.  n == 0 restores the hardware default.
// Not thread-safe; call before launching parallel work, not during.
inline void set_thread_count(int n) {
  detail::configured_threads() = n < 0 ? 0 : n;
  detail::pool_slot().reset();
}

inline int thread_count() {
  int n = detail::configured_threads();
  return n == 0 ? hardware_threads() : n;
}

namespace detail {

inline ThreadPool& pool() {
  auto& slot = pool_slot();
  int want = thread_count() - 1;  // caller participates as one worker
  if (!slot || slot->workers() != want) {
    slot.reset();
    slot = std::make_unique<ThreadPool>(want);
  }
  return *slot;
}

}  // namespace detail

// Runs fn(begin, end) over disjoint subranges of [0, count).  Chunks are
// claimed dynamically in units of `grain`, so fn must tolerate any
// begin/end split and must only write to state owned by its subrange.
template <class Fn>
void parallel_for(std::size_t count, std::size_t grain, Fn&& fn) {
  if (count == 0) return;
  if (grain == 0) grain = 1;
  if (thread_count() == 1 || count <= grain) {
    fn(std::size_t{0}, count);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto job = [&] {
    for (;;) {
      std::size_t begin = next.fetch_add(grain, std::memory_order_relaxed);
      if (begin >= count) break;
      std::size_t end = begin + grain < count ? begin + grain : count;
      fn(begin, end);
    }
  };
  detail::pool().run(job);
}

inline constexpr std::size_t kSumChunk = 2048;

namespace detail {

// Eight-lane accumulation over [begin, end).  The lane a term lands in is
// fixed by its offset from begin, so the result depends only on the range,
// never on the thread count or on how ranges are scheduled.
template <class Term>
double lane_sum(std::size_t begin, std::size_t end, Term&& term) {
  double lane[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::size_t i = begin;
  for (; i + 8 <= end; i += 8) {
    lane[0] += term(i);
    lane[1] += term(i + 1);
    lane[2] += term(i + 2);
    lane[3] += term(i + 3);
    lane[4] += term(i + 4);
    lane[5] += term(i + 5);
    lane[6] += term(i + 6);
    lane[7] += term(i + 7);
  }
  for (std::size_t k = 0; i < end; ++i, ++k) lane[k] += term(i);
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
         ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

}  // namespace detail

// Deterministic sum of term(i) for i in [0, count): per-chunk partial sums
// (chunk size fixed, independent of thread count) combined left to right.
template <class Term>
double parallel_sum(std::size_t count, Term&& term) {
  if (count == 0) return 0.0;
  std::size_t chunks = (count + kSumChunk - 1) / kSumChunk;
  if (chunks == 1) return detail::lane_sum(0, count, term);
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, 1, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      std::size_t begin = c * kSumChunk;
      std::size_t end = begin + kSumChunk < count ? begin + kSumChunk : count;
      partial[c] = detail::lane_sum(begin, end, term);
    }
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace schwarz_inpaint::parallel
