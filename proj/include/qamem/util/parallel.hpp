#pragma once

#include <functional>

namespace qamem::util {

// Fixed-size worker pool. parallel_for blocks until all indices are done;
// the calling thread participates. Work items must write only to their own
// output slots -- the pool gives no ordering guarantees beyond completion.
class ThreadPool {
 public:
  explicit ThreadPool(int n_threads);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void parallel_for(int n, const std::function<void(int)>& fn);
  int size() const;

 private:
  struct Impl;
  Impl* impl_;
};

// Process-wide pool, sized from QAMEM_THREADS or hardware_concurrency.
ThreadPool& global_pool();

}  // namespace qamem::util
