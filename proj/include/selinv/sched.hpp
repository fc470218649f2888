#ifndef SELINV_SCHED_HPP_
#define SELINV_SCHED_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "selinv/inversion.hpp"

namespace selinv {

// D: diagonal block update; O: outer product into a descendant block;
// I: inner product into A^{-1}_{K,I'}; ID: inner product term from A^{-1}_{K,K}.
enum class TaskKind { kDiag, kOuter, kInner, kInnerDiag };

inline const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kDiag: return "D";
    case TaskKind::kOuter: return "O";
    case TaskKind::kInner: return "I";
    case TaskKind::kInnerDiag: return "ID";
  }
  return "?";
}

// Supernode coordinates of a block of A^{-1}.
struct BlockId {
  Int row;
  Int col;
  friend bool operator==(const BlockId&, const BlockId&) = default;
  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

struct Task {
  TaskKind kind;
  Int snode;
  BlockId target;
  std::vector<Int> deps;  // indices into TaskGraph::tasks
};

struct TaskGraph {
  Int snode = -1;
  std::vector<Task> tasks;

  std::size_t size() const { return tasks.size(); }
};

// Tasks of supernode K in the left-looking algorithm (symmetric mode):
// one D, one O per pattern block (I, I') with I in C(K), I' in C'(K), and one
// I and one ID per I' in C'(K). ID depends on D and on the I with the same
// target; nothing else has an intra-supernode dependency.
inline TaskGraph build_task_graph(Int k, const BlockSparsity& blocks) {
  TaskGraph g;
  g.snode = k;
  g.tasks.push_back({TaskKind::kDiag, k, {k, k}, {}});
  const auto& anc = blocks.ancestors[k];
  for (Int ip : blocks.descendants[k]) {
    for (Int i : anc)
      if (blocks.find_ancestor(ip, i) >= 0)
        g.tasks.push_back({TaskKind::kOuter, k, {i, ip}, {}});
    const Int inner = static_cast<Int>(g.tasks.size());
    g.tasks.push_back({TaskKind::kInner, k, {k, ip}, {}});
    g.tasks.push_back({TaskKind::kInnerDiag, k, {k, ip}, {0, inner}});
  }
  for (std::size_t t = 0; t < g.tasks.size(); ++t)
    for (Int d : g.tasks[t].deps)
      if (d < 0 || d >= static_cast<Int>(t))
        throw InternalError("task graph of supernode " + std::to_string(k) +
                            " is not topologically ordered");
  return g;
}

struct TraceEvent {
  TaskKind kind;
  Int snode;
  BlockId target;
  std::int64_t start_ns;
  std::int64_t finish_ns;
  Int worker;  // -1: ran inline on the calling thread
};

// Execution log of every task run while attached to a WorkerPool::run call.
class EventLog {
 public:
  void add(const TraceEvent& e) {
    std::lock_guard lock(mu_);
    events_.push_back(e);
  }
  void mark_graph() {
    std::lock_guard lock(mu_);
    ++graphs_;
  }
  const std::vector<TraceEvent>& events() const { return events_; }
  Int graph_count() const { return graphs_; }

  // CSV: kind,snode,target_row,target_col,start_ns,finish_ns,worker
  void write_csv(std::ostream& out) const {
    out << "kind,snode,target_row,target_col,start_ns,finish_ns,worker\n";
    for (const auto& e : events_)
      out << to_string(e.kind) << "," << e.snode << "," << e.target.row << ","
          << e.target.col << "," << e.start_ns << "," << e.finish_ns << ","
          << e.worker << "\n";
  }

 private:
  std::mutex mu_;
  std::vector<TraceEvent> events_;
  Int graphs_ = 0;
};

class TaskFailure : public Error {
 public:
  TaskFailure(Int task, const Task& t, const std::string& cause)
      : Error("task " + std::to_string(task) + " (" + to_string(t.kind) +
              " of supernode " + std::to_string(t.snode) + ") failed: " + cause),
        task_(task) {}
  Int task() const { return task_; }

 private:
  Int task_;
};

inline std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Worker count from SELINV_NUM_WORKERS, else the hardware concurrency.
inline Int default_worker_count() {
  if (const char* env = std::getenv("SELINV_NUM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<Int>(v);
  }
  return std::max<Int>(1, static_cast<Int>(std::thread::hardware_concurrency()));
}

// Fixed pool of worker threads consuming the ready queue of one task graph at
// a time. A task becomes ready once all of its dependencies have finished.
class WorkerPool {
 public:
  using Body = std::function<void(const Task&)>;

  explicit WorkerPool(Int workers) {
    if (workers < 1) throw Error("worker count must be at least 1");
    threads_.reserve(workers);
    for (Int w = 0; w < workers; ++w) threads_.emplace_back([this, w] { loop(w); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  Int size() const { return static_cast<Int>(threads_.size()); }

  // Runs every task of 'g' exactly once and returns when all have finished.
  // The first failing task aborts the graph: no new tasks start, running ones
  // complete, and TaskFailure names the originating task.
  void run(const TaskGraph& g, const Body& body, EventLog* log = nullptr) {
    if (log) log->mark_graph();
    if (g.tasks.size() == 1 && g.tasks[0].deps.empty()) {
      run_inline(g, body, log);
      return;
    }
    std::unique_lock lock(mu_);
    graph_ = &g;
    body_ = &body;
    log_ = log;
    failure_.reset();
    completed_ = 0;
    running_ = 0;
    pending_.assign(g.tasks.size(), 0);
    dependents_.assign(g.tasks.size(), {});
    for (std::size_t t = 0; t < g.tasks.size(); ++t) {
      pending_[t] = static_cast<Int>(g.tasks[t].deps.size());
      for (Int d : g.tasks[t].deps) dependents_[d].push_back(static_cast<Int>(t));
    }
    ready_.clear();
    for (std::size_t t = 0; t < g.tasks.size(); ++t)
      if (pending_[t] == 0) ready_.push_back(static_cast<Int>(t));
    work_cv_.notify_all();
    done_cv_.wait(lock, [&] {
      return completed_ == static_cast<Int>(g.tasks.size()) ||
             (failure_ && running_ == 0);
    });
    graph_ = nullptr;
    body_ = nullptr;
    log_ = nullptr;
    ready_.clear();
    if (failure_) {
      auto f = std::move(*failure_);
      failure_.reset();
      throw TaskFailure(f.task, g.tasks[f.task], f.message);
    }
  }

 private:
  struct Failure {
    Int task;
    std::string message;
  };

  void run_inline(const TaskGraph& g, const Body& body, EventLog* log) {
    const Task& t = g.tasks[0];
    const std::int64_t start = now_ns();
    try {
      body(t);
    } catch (const std::exception& e) {
      throw TaskFailure(0, t, e.what());
    }
    if (log) log->add({t.kind, t.snode, t.target, start, now_ns(), -1});
  }

  void loop(Int worker) {
    std::unique_lock lock(mu_);
    while (true) {
      work_cv_.wait(lock, [&] { return stop_ || !ready_.empty(); });
      if (ready_.empty()) return;  // stop requested
      const Int id = ready_.front();
      ready_.pop_front();
      ++running_;
      const Task& task = graph_->tasks[id];
      const Body& body = *body_;
      EventLog* log = log_;
      lock.unlock();

      const std::int64_t start = now_ns();
      std::optional<std::string> error;
      try {
        body(task);
      } catch (const std::exception& e) {
        error = e.what();
      } catch (...) {
        error = "unknown exception";
      }
      const std::int64_t finish = now_ns();
      if (log && !error) log->add({task.kind, task.snode, task.target, start, finish, worker});

      lock.lock();
      --running_;
      if (error) {
        if (!failure_) failure_ = Failure{id, *error};
        ready_.clear();
      } else {
        ++completed_;
        if (!failure_) {
          bool woke = false;
          for (Int d : dependents_[id]) {
            if (--pending_[d] == 0) {
              ready_.push_back(d);
              woke = true;
            }
          }
          if (woke) work_cv_.notify_all();
        }
      }
      if (completed_ == static_cast<Int>(graph_->tasks.size()) ||
          (failure_ && running_ == 0))
        done_cv_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable done_cv_;
  bool stop_ = false;

  const TaskGraph* graph_ = nullptr;
  const Body* body_ = nullptr;
  EventLog* log_ = nullptr;
  std::vector<Int> pending_;
  std::vector<std::vector<Int>> dependents_;
  std::deque<Int> ready_;
  Int completed_ = 0;
  Int running_ = 0;
  std::optional<Failure> failure_;
};

inline void execute_graph(const TaskGraph& g, WorkerPool& pool,
                          const WorkerPool::Body& body, EventLog* log = nullptr) {
  pool.run(g, body, log);
}

inline void execute_graph(const TaskGraph& g, Int workers,
                          const WorkerPool::Body& body, EventLog* log = nullptr) {
  WorkerPool pool(workers);
  pool.run(g, body, log);
}

// Task-parallel left-looking selected inversion. Supernodes are processed
// root first with a full synchronization point between consecutive ones; the
// result is bitwise identical to selinv_left for any worker count. General
// (nonsymmetric) mode runs the serial selinv_left.
inline SelectedInverse selinv_left_parallel(const NormalizedFactors& nf, WorkerPool& pool,
                                            EventLog* log = nullptr) {
  if (!nf.symmetric()) return selinv_left(nf);
  const auto& blocks = nf.symbolic().blocks;
  SelectedInverse si(nf.symbolic_ptr(), true);
  for (Int k = blocks.count() - 1; k >= 0; --k) {
    const TaskGraph g = build_task_graph(k, blocks);
    pool.run(
        g,
        [&](const Task& t) {
          switch (t.kind) {
            case TaskKind::kDiag: diag_stage(k, nf, si); break;
            case TaskKind::kOuter:
              outer_product_update(k, t.target.row, t.target.col, nf, si);
              break;
            case TaskKind::kInner: inner_product_update(k, t.target.col, nf, si); break;
            case TaskKind::kInnerDiag:
              inner_product_diag_update(k, t.target.col, nf, si);
              break;
          }
        },
        log);
  }
  return si;
}

inline SelectedInverse selinv_left_parallel(const NormalizedFactors& nf, Int workers,
                                            EventLog* log = nullptr) {
  WorkerPool pool(workers);
  return selinv_left_parallel(nf, pool, log);
}

}  // namespace selinv

#endif  // SELINV_SCHED_HPP_
