#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "aeroforge/pipeline.hpp"
#include "aeroforge/util.hpp"
#include "aeroforge/workspace.hpp"

#ifndef AEROFORGE_DATA_DIR
#define AEROFORGE_DATA_DIR ""
#endif

namespace {

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted.store(true); }

void print_summary(const aeroforge::pipeline::RunSummary& s) {
  using aeroforge::pipeline::RunStatus;
  switch (s.status) {
    case RunStatus::kSuccess:
      std::cout << "pipeline complete\n";
      if (!s.winner_airfoil.empty())
        std::cout << "  winner airfoil: " << s.winner_airfoil << " (" << s.winner_case_id << ")\n";
      if (s.sweep_total > 0)
        std::cout << "  structural sweep: " << s.sweep_total << " configurations\n";
      if (s.best_stress_mpa > 0)
        std::cout << "  best stress: " << s.best_stress_mpa << " MPa (improvement "
                  << 100.0 * s.improvement_fraction << " %, " << s.pareto_size
                  << " Pareto designs)\n";
      break;
    case RunStatus::kValidationFailure:
      std::cout << "requirement validation failed\n";
      break;
    case RunStatus::kExecutionFailure:
      std::cout << "execution failed: " << s.tasks_failed << " tasks failed after retries\n";
      break;
    case RunStatus::kInterrupted:
      std::cout << "interrupted; checkpoint written, use 'resume' to continue\n";
      break;
    case RunStatus::kNoCheckpoint:
      std::cout << "no valid checkpoint found\n";
      break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace aeroforge;

  CLI::App app{"aeroforge: multi-agent aero-structural design pipeline"};
  app.require_subcommand(1);

  pipeline::PipelineOptions options;
  options.data_dir = AEROFORGE_DATA_DIR;
  std::string root_str, data_dir_str, spec_path, fixture_path, format = "md";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--root", root_str, "project workspace directory")
        ->envname("AEROFORGE_ROOT")
        ->required();
    cmd->add_option("--max-parallel", options.max_parallel, "concurrent task budget")
        ->envname("AEROFORGE_MAX_PARALLEL");
    cmd->add_flag("--serial", options.serial, "force max-parallel = 1");
    cmd->add_option("--data-dir", data_dir_str, "bundled data directory");
  };

  auto* run_cmd = app.add_subcommand("run", "run the full pipeline from a requirement spec");
  add_common(run_cmd);
  run_cmd->add_option("spec", spec_path, "requirement spec document (JSON)")->required();
  run_cmd->add_option("--planner", options.planner_kind, "planning backend: scripted | remote")
      ->check(CLI::IsMember({"scripted", "remote"}));
  run_cmd->add_option("--planner-url", options.planner_url, "remote planner endpoint")
      ->envname("AEROFORGE_PLANNER_URL");
  run_cmd->add_option("--solver", options.solver, "aero solver: desk | adapter")
      ->check(CLI::IsMember({"desk", "adapter"}));
  run_cmd->add_option("--seed", options.seed, "deterministic run seed");
  run_cmd->add_flag("--force", options.force_init, "re-initialize a non-empty root");
  run_cmd->add_option("--fixture-results", fixture_path,
                      "inject per-case performance fixtures at selection");

  auto* resume_cmd = app.add_subcommand("resume", "continue from the newest valid checkpoint");
  add_common(resume_cmd);
  bool from_last = true;
  resume_cmd->add_flag("--from-last", from_last, "restore the newest valid checkpoint (default)");

  auto* report_cmd = app.add_subcommand("report", "regenerate result.md and summary CSVs");
  add_common(report_cmd);
  report_cmd->add_option("--format", format, "md | csv")->check(CLI::IsMember({"md", "csv"}));

  CLI11_PARSE(app, argc, argv);

  options.root = root_str;
  if (!data_dir_str.empty()) options.data_dir = data_dir_str;
  if (!fixture_path.empty()) options.fixture_results = fixture_path;
  options.interrupt_flag = &g_interrupted;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  try {
    if (run_cmd->parsed()) {
      auto spec = pipeline::load_spec_file(spec_path);
      auto violations = domain::validate(spec);
      if (!violations.empty()) {
        std::cout << "requirement validation failed:\n" << domain::describe(violations);
        return pipeline::exit_code(pipeline::RunStatus::kValidationFailure);
      }
      auto summary = pipeline::run(spec, options);
      print_summary(summary);
      return pipeline::exit_code(summary.status);
    }
    if (resume_cmd->parsed()) {
      auto summary = pipeline::resume(options);
      print_summary(summary);
      return pipeline::exit_code(summary.status);
    }
    if (report_cmd->parsed()) {
      auto status = pipeline::write_report(options.root, format);
      if (status == pipeline::RunStatus::kSuccess) {
        std::cout << "report written to " << (options.root / "airfoil" / "result.md").string()
                  << "\n";
      } else {
        std::cout << "workspace is empty or has no plan; nothing to report\n";
      }
      return pipeline::exit_code(status);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pipeline::exit_code(pipeline::RunStatus::kExecutionFailure);
  }
  return 0;
}
