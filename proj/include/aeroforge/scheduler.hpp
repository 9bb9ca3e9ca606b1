#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aeroforge/planner.hpp"

namespace aeroforge::scheduler {

struct SchedulerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by executors to signal a task failure; carries the solver/tool logs
/// that the recovery classifier inspects.
struct TaskExecutionError : std::runtime_error {
  explicit TaskExecutionError(const std::string& message, std::string logs_text = "")
      : std::runtime_error(message), logs(std::move(logs_text)) {}
  std::string logs;
};

struct SchedulerConfig {
  int max_parallel = 4;
  int tick_interval_ms = 1;
  /// Role-specific duration defaults (seconds) used before any history exists.
  std::map<std::string, double> default_duration_s = {
      {"planner", 1.0},    {"geometry", 0.5},   {"aerodynamics", 4.0},
      {"acoustics", 1.0},  {"structures", 2.0}, {"optimizer", 8.0}};
};

/// Completed-duration history per (role, kind); estimates are the moving
/// average of the most recent completions.
class DurationHistory {
 public:
  void record(workspace::AgentRole role, const std::string& kind, double seconds);
  /// Moving average for the role+kind, or the role default when no history.
  double estimate(workspace::AgentRole role, const std::string& kind,
                  const SchedulerConfig& config) const;

 private:
  static constexpr std::size_t kWindow = 20;
  std::map<std::string, std::vector<double>> samples_;
};

double estimate_duration(const planner::TaskNode& node, const DurationHistory& history,
                         const SchedulerConfig& config);

struct NodeReport {
  std::string task_id;
  planner::TaskStatus status = planner::TaskStatus::kPending;
  double wall_seconds = 0.0;
  int attempts = 0;
  std::uint64_t start_seq = 0;  // global event ordering, for safety checks
  std::uint64_t end_seq = 0;
};

struct RunReport {
  std::vector<NodeReport> nodes;
  double makespan_seconds = 0.0;
  int max_observed_parallel = 0;
  bool interrupted = false;
  std::size_t done_count = 0;
  std::size_t failed_count = 0;

  const NodeReport* find(const std::string& id) const;
};

using Executor = std::function<void(planner::TaskNode&)>;
using CompletionCallback = std::function<void(const planner::TaskGraph&, const planner::TaskNode&)>;

/// Executes a task graph with a bounded concurrency budget. Ready tasks are
/// ordered by estimated duration (shorter first, ties by id). A failed node
/// fails its dependents transitively; independent branches keep running. With
/// max_parallel = 1 tasks run inline in a deterministic serial order.
class Scheduler {
 public:
  explicit Scheduler(SchedulerConfig config = {});

  void register_executor(workspace::AgentRole role, Executor executor);
  void set_completion_callback(CompletionCallback cb);
  /// Cooperative interrupt: stop launching new tasks, finish the running ones.
  void request_stop() { stop_requested_.store(true); }
  bool stop_requested() const { return stop_requested_.load(); }

  RunReport run(planner::TaskGraph& graph);

  DurationHistory& history() { return history_; }

 private:
  SchedulerConfig config_;
  std::map<workspace::AgentRole, Executor> executors_;
  CompletionCallback on_complete_;
  DurationHistory history_;
  std::atomic<bool> stop_requested_{false};
};

}  // namespace aeroforge::scheduler
