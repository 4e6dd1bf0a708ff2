#pragma once

// Work-stealing thread pool. Each worker owns a deque: it pops its own work
// from the back and steals from the front of the others when idle.

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace sparta {

class TaskPool {
 public:
  explicit TaskPool(std::size_t workers);
  ~TaskPool();

  TaskPool(const TaskPool&) = delete;
  TaskPool& operator=(const TaskPool&) = delete;

  std::size_t workers() const { return threads_.size(); }

  /// Runs fn(0..count-1) as separate tasks and blocks until all finish.
  /// The first exception thrown by a task is rethrown here.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

  /// Process-wide pool for a given worker count, created on first use.
  static TaskPool& shared(std::size_t workers);

 private:
  using Task = std::function<void()>;

  struct Queue {
    std::mutex mutex;
    std::deque<Task> tasks;
  };

  void submit(std::size_t queue, Task task);
  bool try_pop(std::size_t self, Task& out);
  void worker_loop(std::size_t self);

  std::vector<std::unique_ptr<Queue>> queues_;
  std::vector<std::thread> threads_;
  std::mutex sleep_mutex_;
  std::condition_variable wake_;
  std::size_t pending_ = 0;  // guarded by sleep_mutex_
  bool stop_ = false;
};

}  // namespace sparta
