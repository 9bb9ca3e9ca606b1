#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aeroforge/domain.hpp"
#include "aeroforge/workspace.hpp"

namespace aeroforge::planner {

struct PlannerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TaskStatus { kPending, kRunning, kDone, kFailed };

std::string status_name(TaskStatus s);
TaskStatus status_from_name(const std::string& s);

struct TaskNode {
  std::string task_id;
  workspace::AgentRole role = workspace::AgentRole::geometry;
  std::string kind;             // executor dispatch tag
  nlohmann::json payload;       // path references and parameters
  std::vector<std::string> dependencies;
  TaskStatus status = TaskStatus::kPending;
  double priority = 0.0;        // estimated duration, seconds (lower runs first)
  int attempts = 0;
};

void to_json(nlohmann::json& j, const TaskNode& n);
void from_json(const nlohmann::json& j, TaskNode& n);

struct TaskGraph {
  std::vector<TaskNode> nodes;

  TaskNode* find(const std::string& id);
  const TaskNode* find(const std::string& id) const;
  bool is_acyclic() const;
  /// Kahn topological order (ties by task_id); throws PlannerError on cycles.
  std::vector<std::string> topological_order() const;
};

void to_json(nlohmann::json& j, const TaskGraph& g);
void from_json(const nlohmann::json& j, TaskGraph& g);

/// Planning intelligence is pluggable: the scripted backend is deterministic,
/// the remote backend talks to a planning service over HTTP.
class PlannerBackend {
 public:
  virtual ~PlannerBackend() = default;
  virtual std::string kind() const = 0;
  virtual domain::DesignMatrix generate_matrix(const domain::RequirementSpec& spec,
                                               std::uint64_t seed) = 0;
};

/// Deterministic matrix generation: the full airfoil x velocity grid with
/// angles of attack cycled through a stride-3 permutation of the integer
/// degrees spanning the requested range, so every airfoil sees varied angles.
class ScriptedBackend : public PlannerBackend {
 public:
  std::string kind() const override { return "scripted"; }
  domain::DesignMatrix generate_matrix(const domain::RequirementSpec& spec,
                                       std::uint64_t seed) override;
};

/// Remote planning service: POST /plan with the spec and seed, expecting a
/// JSON case list back. Responses are schema-validated, capped at 1 MiB, and
/// any malformed reply surfaces as PlannerError (a task failure upstream).
class RemoteBackend : public PlannerBackend {
 public:
  explicit RemoteBackend(std::string base_url, std::string api_token = "");
  std::string kind() const override { return "remote-language-model"; }
  domain::DesignMatrix generate_matrix(const domain::RequirementSpec& spec,
                                       std::uint64_t seed) override;

  static constexpr std::size_t kMaxResponseBytes = 1 << 20;

  /// Validates a decoded response document into a matrix (exposed for tests).
  static domain::DesignMatrix parse_response(const nlohmann::json& body,
                                             const domain::RequirementSpec& spec);

 private:
  std::string base_url_;
  std::string api_token_;
};

std::unique_ptr<PlannerBackend> make_backend(const std::string& kind, const std::string& url = "");

/// Case id shared with the workspace directory naming.
std::string case_id_for(const std::string& airfoil, double velocity_ms, double aoa_deg);

/// Phase structure: per-case geometry -> aero -> acoustics chains running in
/// parallel, a selection barrier over all of them, the structural sweep
/// fanning out behind selection, and a final optimization node.
TaskGraph build_task_graph(const domain::DesignMatrix& matrix, const domain::RequirementSpec& spec,
                           std::size_t sweep_size);

struct CasePerformance {
  std::string case_id;
  std::string airfoil;
  double lift_to_drag = 0.0;
  double oaspl_db = 0.0;
  bool converged = true;
};

struct RankedCase {
  std::string case_id;
  std::string airfoil;
  double score = 0.0;  // J
  double lift_to_drag = 0.0;
  double oaspl_db = 0.0;
};

struct SelectionOutcome {
  std::vector<RankedCase> ranking;  // best first
  std::string winner_case_id;
  std::string winner_airfoil;
  bool degenerate_noise = false;  // all OASPL equal: acoustics dropped out
};

/// Weighted scoring J = w1 * (L/D)/(L/D)max + w2 * (1 - normalized OASPL);
/// winner is the argmax, ties broken by higher L/D then case id.
SelectionOutcome select_airfoil(const std::vector<CasePerformance>& results, double aero_weight,
                                double noise_weight);

std::string matrix_csv(const domain::DesignMatrix& matrix);
std::string aerodynamics_plan_md(const domain::RequirementSpec& spec,
                                 const domain::DesignMatrix& matrix);
std::string acoustics_plan_md(const domain::RequirementSpec& spec);

}  // namespace aeroforge::planner
