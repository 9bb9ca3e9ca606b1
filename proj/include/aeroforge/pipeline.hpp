#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>

#include "aeroforge/domain.hpp"
#include "aeroforge/planner.hpp"
#include "aeroforge/scheduler.hpp"

namespace aeroforge::pipeline {

namespace fs = std::filesystem;

enum class RunStatus { kSuccess, kValidationFailure, kExecutionFailure, kInterrupted, kNoCheckpoint };

int exit_code(RunStatus s);  // 0 / 2 / 3 / 4

struct PipelineOptions {
  fs::path root;
  fs::path data_dir;             // bundled notes and fixtures
  int max_parallel = 4;
  bool serial = false;           // forces max_parallel = 1
  std::string planner_kind = "scripted";
  std::string planner_url;       // remote planning endpoint
  std::string solver = "desk";   // desk | adapter
  std::uint64_t seed = 42;
  bool force_init = false;
  int checkpoint_interval = 10;  // stages between checkpoints within a phase
  int bo_budget = 32;
  int gp_multistarts = 6;        // surrogate fit effort during the pipeline
  int gp_refine_iterations = 80;

  // test and operations hooks
  std::string stop_after_phase;          // cooperative interrupt once a phase completes
  fs::path fixture_results;              // injected per-case performance for selection
  std::function<void(int)> retry_wait;   // injectable backoff clock
  std::atomic<bool>* interrupt_flag = nullptr;  // external stop request (signals)
};

struct RunSummary {
  RunStatus status = RunStatus::kExecutionFailure;
  std::string winner_airfoil;
  std::string winner_case_id;
  std::size_t sweep_total = 0;
  std::size_t sweep_failures = 0;
  double best_discrete_stress_mpa = 0.0;
  double best_stress_mpa = 0.0;
  double improvement_fraction = 0.0;
  std::size_t pareto_size = 0;
  std::size_t tasks_done = 0;
  std::size_t tasks_failed = 0;
};

domain::RequirementSpec load_spec_file(const fs::path& spec_path);

/// Runs the full pipeline: planning, per-case aero and acoustic analysis,
/// selection, the structural sweep, optimization, and reporting.
RunSummary run(const domain::RequirementSpec& spec, const PipelineOptions& options);

/// Continues from the newest valid checkpoint under root/checkpoints.
RunSummary resume(const PipelineOptions& options);

/// Regenerates result.md and the multi-case CSV summaries from whatever the
/// workspace currently holds; missing phases are marked explicitly.
RunStatus write_report(const fs::path& root, const std::string& format = "md");

}  // namespace aeroforge::pipeline
