#include "aeroforge/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <set>
#include <thread>

namespace aeroforge::scheduler {

using planner::TaskGraph;
using planner::TaskNode;
using planner::TaskStatus;

void DurationHistory::record(workspace::AgentRole role, const std::string& kind, double seconds) {
  auto& v = samples_[workspace::role_name(role) + ":" + kind];
  v.push_back(seconds);
  if (v.size() > kWindow) v.erase(v.begin());
}

double DurationHistory::estimate(workspace::AgentRole role, const std::string& kind,
                                 const SchedulerConfig& config) const {
  auto it = samples_.find(workspace::role_name(role) + ":" + kind);
  if (it != samples_.end() && !it->second.empty()) {
    double sum = 0.0;
    for (double s : it->second) sum += s;
    return sum / static_cast<double>(it->second.size());
  }
  auto d = config.default_duration_s.find(workspace::role_name(role));
  return d != config.default_duration_s.end() ? d->second : 1.0;
}

double estimate_duration(const TaskNode& node, const DurationHistory& history,
                         const SchedulerConfig& config) {
  return history.estimate(node.role, node.kind, config);
}

const NodeReport* RunReport::find(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.task_id == id) return &n;
  return nullptr;
}

Scheduler::Scheduler(SchedulerConfig config) : config_(std::move(config)) {
  if (config_.max_parallel < 1) throw SchedulerError("max_parallel must be >= 1");
}

void Scheduler::register_executor(workspace::AgentRole role, Executor executor) {
  executors_[role] = std::move(executor);
}

void Scheduler::set_completion_callback(CompletionCallback cb) { on_complete_ = std::move(cb); }

RunReport Scheduler::run(TaskGraph& graph) {
  if (!graph.is_acyclic()) throw SchedulerError("task graph contains a cycle");
  for (const auto& n : graph.nodes)
    if (n.status != TaskStatus::kDone && !executors_.count(n.role))
      throw SchedulerError("no executor registered for role " + workspace::role_name(n.role));

  std::mutex mu;
  std::condition_variable cv;
  RunReport report;
  report.nodes.resize(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    report.nodes[i].task_id = graph.nodes[i].task_id;
    report.nodes[i].status = graph.nodes[i].status;
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) index[graph.nodes[i].task_id] = i;

  int running = 0;
  int observed_max = 0;
  std::uint64_t event_seq = 0;
  std::vector<std::thread> workers;
  const auto t0 = std::chrono::steady_clock::now();

  auto deps_done = [&](const TaskNode& n) {
    for (const auto& d : n.dependencies)
      if (graph.nodes[index.at(d)].status != TaskStatus::kDone) return false;
    return true;
  };
  auto any_dep_failed = [&](const TaskNode& n) {
    for (const auto& d : n.dependencies)
      if (graph.nodes[index.at(d)].status == TaskStatus::kFailed) return true;
    return false;
  };

  // failure propagation: dependents of failed nodes fail without running
  auto propagate_failures = [&] {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        auto& n = graph.nodes[i];
        if (n.status == TaskStatus::kPending && any_dep_failed(n)) {
          n.status = TaskStatus::kFailed;
          report.nodes[i].status = TaskStatus::kFailed;
          changed = true;
        }
      }
    }
  };

  auto execute_node = [&](std::size_t i) {
    // runs on a worker thread (or inline in serial mode); node status is
    // already kRunning when this is entered
    auto& node = graph.nodes[i];
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      executors_.at(node.role)(node);
    } catch (const std::exception&) {
      ok = false;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    planner::TaskNode completed_copy;
    {
      std::unique_lock lk(mu);
      node.status = ok ? TaskStatus::kDone : TaskStatus::kFailed;
      report.nodes[i].status = node.status;
      report.nodes[i].wall_seconds = secs;
      report.nodes[i].attempts = node.attempts;
      report.nodes[i].end_seq = ++event_seq;
      history_.record(node.role, node.kind, secs);
      propagate_failures();
      running--;
      completed_copy = node;
      if (on_complete_) on_complete_(graph, completed_copy);
    }
    cv.notify_all();
  };

  std::unique_lock lk(mu);
  propagate_failures();
  while (true) {
    if (stop_requested_.load()) {
      report.interrupted = true;
      break;
    }

    // gather ready nodes, shortest estimate first, ties by id
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      auto& n = graph.nodes[i];
      if (n.status == TaskStatus::kPending && deps_done(n)) ready.push_back(i);
    }
    std::sort(ready.begin(), ready.end(), [&](std::size_t a, std::size_t b) {
      double ea = estimate_duration(graph.nodes[a], history_, config_);
      double eb = estimate_duration(graph.nodes[b], history_, config_);
      if (ea != eb) return ea < eb;
      return graph.nodes[a].task_id < graph.nodes[b].task_id;
    });

    bool launched = false;
    for (std::size_t idx : ready) {
      if (running >= config_.max_parallel || stop_requested_.load()) break;
      auto& n = graph.nodes[idx];
      n.status = TaskStatus::kRunning;
      n.priority = estimate_duration(n, history_, config_);
      report.nodes[idx].status = TaskStatus::kRunning;
      report.nodes[idx].start_seq = ++event_seq;
      running++;
      observed_max = std::max(observed_max, running);
      launched = true;
      if (config_.max_parallel == 1) {
        lk.unlock();
        execute_node(idx);
        lk.lock();
      } else {
        workers.emplace_back(execute_node, idx);
      }
      if (config_.max_parallel == 1) break;  // re-evaluate readiness after each task
    }

    bool any_pending_or_running = false;
    for (const auto& n : graph.nodes)
      if (n.status == TaskStatus::kPending || n.status == TaskStatus::kRunning) {
        any_pending_or_running = true;
        break;
      }
    if (!any_pending_or_running) break;

    if (!launched) {
      cv.wait_for(lk, std::chrono::milliseconds(std::max(1, config_.tick_interval_ms)));
    }
  }

  // drain the running tasks on interrupt or completion
  cv.wait(lk, [&] { return running == 0; });
  lk.unlock();
  for (auto& w : workers) w.join();
  lk.lock();

  report.makespan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.max_observed_parallel = observed_max;
  for (const auto& n : graph.nodes) {
    if (n.status == TaskStatus::kDone) report.done_count++;
    if (n.status == TaskStatus::kFailed) report.failed_count++;
  }
  return report;
}

}  // namespace aeroforge::scheduler
