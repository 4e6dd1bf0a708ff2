#include "sparta/task_pool.hpp"

#include <exception>
#include <latch>
#include <map>

namespace sparta {

TaskPool::TaskPool(std::size_t workers) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) queues_.push_back(std::make_unique<Queue>());
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this, i] { worker_loop(i); });
}

TaskPool::~TaskPool() {
  {
    std::lock_guard lock(sleep_mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void TaskPool::submit(std::size_t queue, Task task) {
  {
    std::lock_guard lock(queues_[queue]->mutex);
    queues_[queue]->tasks.push_back(std::move(task));
  }
  {
    std::lock_guard lock(sleep_mutex_);
    ++pending_;
  }
  wake_.notify_one();
}

bool TaskPool::try_pop(std::size_t self, Task& out) {
  {
    auto& own = *queues_[self];
    std::lock_guard lock(own.mutex);
    if (!own.tasks.empty()) {
      out = std::move(own.tasks.back());
      own.tasks.pop_back();
      return true;
    }
  }
  for (std::size_t k = 1; k < queues_.size(); ++k) {
    auto& victim = *queues_[(self + k) % queues_.size()];
    std::lock_guard lock(victim.mutex);
    if (!victim.tasks.empty()) {
      out = std::move(victim.tasks.front());
      victim.tasks.pop_front();
      return true;
    }
  }
  return false;
}

void TaskPool::worker_loop(std::size_t self) {
  for (;;) {
    {
      std::unique_lock lock(sleep_mutex_);
      wake_.wait(lock, [this] { return stop_ || pending_ > 0; });
      if (pending_ == 0) return;  // stopping with nothing left
      --pending_;
    }
    // A pending count was claimed, so some queue holds a task for us.
    Task task;
    while (!try_pop(self, task)) std::this_thread::yield();
    task();
  }
}

void TaskPool::parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::latch done(static_cast<std::ptrdiff_t>(count));
  std::mutex error_mutex;
  std::exception_ptr error;
  for (std::size_t i = 0; i < count; ++i) {
    submit(i % queues_.size(), [&, i] {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
      done.count_down();
    });
  }
  done.wait();
  if (error) std::rethrow_exception(error);
}

TaskPool& TaskPool::shared(std::size_t workers) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<TaskPool>> pools;
  std::lock_guard lock(mutex);
  auto& pool = pools[workers];
  if (!pool) pool = std::make_unique<TaskPool>(workers);
  return *pool;
}

}  // namespace sparta
