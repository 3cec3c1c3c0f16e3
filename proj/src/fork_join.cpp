#include "okml/fork_join.hpp"

#include <cstdlib>
#include <limits>
#include <string>

#include "okml/errors.hpp"

namespace okml {

std::size_t worker_count_from_env() {
  std::size_t requested = 0;
  if (const char* raw = std::getenv("OKML_THREADS"); raw && *raw) {
    try {
      std::size_t used = 0;
      const long long value = std::stoll(raw, &used);
      if (used != std::string(raw).size() || value < 0) throw ConfigError("");
      requested = static_cast<std::size_t>(value);
    } catch (const std::exception&) {
      throw ConfigError(std::string("OKML_THREADS must be a nonnegative integer, got '") +
                        raw + "'");
    }
  }
  if (requested == 0) requested = std::thread::hardware_concurrency();
  return requested == 0 ? 1 : requested;
}

WorkerPool::WorkerPool(std::size_t workers)
    : workers_(workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                            : workers),
      errors_(workers_),
      error_index_(workers_) {
  threads_.reserve(workers_ - 1);
  for (std::size_t id = 1; id < workers_; ++id)
    threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run_share(std::size_t id) {
  for (std::size_t i = id; i < count_; i += workers_) {
    try {
      (*job_)(i);
    } catch (...) {
      errors_[id] = std::current_exception();
      error_index_[id] = i;
      return;
    }
  }
}

void WorkerPool::worker_loop(std::size_t id) {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
    }
    run_share(id);
    {
      std::lock_guard lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

void WorkerPool::parallel_for(std::size_t count,
                              const std::function<void(std::size_t)>& body) {
  if (workers_ == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &body;
    count_ = count;
    std::fill(errors_.begin(), errors_.end(), nullptr);
    pending_ = threads_.size();
    ++generation_;
  }
  start_cv_.notify_all();
  run_share(0);
  {
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    job_ = nullptr;
  }

  std::exception_ptr first;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
  for (std::size_t id = 0; id < workers_; ++id) {
    if (errors_[id] && error_index_[id] < first_index) {
      first = errors_[id];
      first_index = error_index_[id];
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace okml
