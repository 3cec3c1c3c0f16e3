#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace okml {

/// Worker count requested through OKML_THREADS; 0 or unset means one
/// worker per hardware thread. Never returns 0.
std::size_t worker_count_from_env();

/// Persistent fork-join pool. parallel_for hands index i to worker
/// i % size(); the calling thread acts as worker 0. Bodies must only touch
/// state owned by their index, so results never depend on scheduling.
class WorkerPool {
 public:
  /// workers == 0 selects std::thread::hardware_concurrency().
  explicit WorkerPool(std::size_t workers = 1);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return workers_; }

  /// Runs body(i) for every i in [0, count) and joins. The exception thrown
  /// for the lowest failing index is rethrown after all workers finish.
  void parallel_for(std::size_t count,
                    const std::function<void(std::size_t)>& body);

 private:
  void worker_loop(std::size_t id);
  void run_share(std::size_t id);

  std::size_t workers_;
  std::vector<std::thread> threads_;

  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  std::uint64_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;

  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t count_ = 0;
  std::vector<std::exception_ptr> errors_;
  std::vector<std::size_t> error_index_;
};

}  // namespace okml
