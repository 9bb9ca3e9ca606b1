#include "aeroforge/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include <httplib.h>

#include "aeroforge/aero.hpp"
#include "aeroforge/geometry.hpp"
#include "aeroforge/structures.hpp"
#include "aeroforge/util.hpp"

namespace aeroforge::planner {

using nlohmann::json;
using util::num_str;

std::string status_name(TaskStatus s) {
  switch (s) {
    case TaskStatus::kPending: return "pending";
    case TaskStatus::kRunning: return "running";
    case TaskStatus::kDone: return "done";
    case TaskStatus::kFailed: return "failed";
  }
  throw std::logic_error("unknown status");
}

TaskStatus status_from_name(const std::string& s) {
  if (s == "pending") return TaskStatus::kPending;
  if (s == "running") return TaskStatus::kRunning;
  if (s == "done") return TaskStatus::kDone;
  if (s == "failed") return TaskStatus::kFailed;
  throw PlannerError("unknown task status: " + s);
}

void to_json(json& j, const TaskNode& n) {
  j = json{{"task_id", n.task_id},       {"role", workspace::role_name(n.role)},
           {"kind", n.kind},             {"payload", n.payload},
           {"dependencies", n.dependencies}, {"status", status_name(n.status)},
           {"priority", n.priority},     {"attempts", n.attempts}};
}

void from_json(const json& j, TaskNode& n) {
  j.at("task_id").get_to(n.task_id);
  n.role = workspace::role_from_name(j.at("role").get<std::string>());
  j.at("kind").get_to(n.kind);
  n.payload = j.at("payload");
  j.at("dependencies").get_to(n.dependencies);
  n.status = status_from_name(j.at("status").get<std::string>());
  j.at("priority").get_to(n.priority);
  j.at("attempts").get_to(n.attempts);
}

void to_json(json& j, const TaskGraph& g) { j = json{{"nodes", g.nodes}}; }
void from_json(const json& j, TaskGraph& g) { j.at("nodes").get_to(g.nodes); }

TaskNode* TaskGraph::find(const std::string& id) {
  for (auto& n : nodes)
    if (n.task_id == id) return &n;
  return nullptr;
}

const TaskNode* TaskGraph::find(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.task_id == id) return &n;
  return nullptr;
}

std::vector<std::string> TaskGraph::topological_order() const {
  std::map<std::string, int> in_degree;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& n : nodes) in_degree[n.task_id] = 0;
  for (const auto& n : nodes) {
    for (const auto& d : n.dependencies) {
      if (!in_degree.count(d)) throw PlannerError("dependency on unknown task: " + d);
      in_degree[n.task_id]++;
      dependents[d].push_back(n.task_id);
    }
  }
  std::set<std::string> ready;
  for (const auto& [id, deg] : in_degree)
    if (deg == 0) ready.insert(id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& dep : dependents[id])
      if (--in_degree[dep] == 0) ready.insert(dep);
  }
  if (order.size() != nodes.size()) throw PlannerError("task graph contains a cycle");
  return order;
}

bool TaskGraph::is_acyclic() const {
  try {
    topological_order();
    return true;
  } catch (const PlannerError&) {
    return false;
  }
}

std::string case_id_for(const std::string& airfoil, double velocity_ms, double aoa_deg) {
  domain::CaseConfig c;
  c.airfoil = airfoil;
  c.velocity_ms = velocity_ms;
  c.aoa_deg = aoa_deg;
  return workspace::ProjectWorkspace::case_dir_name(c);
}

domain::DesignMatrix ScriptedBackend::generate_matrix(const domain::RequirementSpec& spec,
                                                      std::uint64_t /*seed*/) {
  if (spec.airfoil_candidates.empty()) throw PlannerError("empty airfoil candidate list");
  auto violations = domain::validate(spec);
  if (!violations.empty())
    throw PlannerError("invalid requirement spec: " + domain::describe(violations));

  // integer-degree angle set across the requested range
  std::vector<double> aoa_set;
  for (double a = std::ceil(spec.aoa_range.min_deg); a <= spec.aoa_range.max_deg + 1e-9; a += 1.0)
    aoa_set.push_back(a);
  if (aoa_set.empty()) aoa_set.push_back(spec.aoa_range.min_deg);

  domain::DesignMatrix m;
  std::size_t k = 0;
  for (const auto& airfoil : spec.airfoil_candidates) {
    geometry::parse_designator(airfoil);  // reject malformed candidates early
    for (double u : spec.velocities_ms) {
      domain::CaseConfig c;
      c.airfoil = airfoil;
      c.chord_m = spec.chord_m;
      c.velocity_ms = u;
      c.aoa_deg = aoa_set[(3 * k) % aoa_set.size()];
      c.kinematic_viscosity_m2_s = spec.kinematic_viscosity_m2_s;
      c.reynolds = aero::reynolds(u, spec.chord_m, spec.kinematic_viscosity_m2_s);
      c.case_id = case_id_for(airfoil, u, c.aoa_deg);
      m.cases.push_back(std::move(c));
      ++k;
    }
  }
  return m;
}

RemoteBackend::RemoteBackend(std::string base_url, std::string api_token)
    : base_url_(std::move(base_url)), api_token_(std::move(api_token)) {}

domain::DesignMatrix RemoteBackend::parse_response(const json& body,
                                                   const domain::RequirementSpec& spec) {
  if (!body.is_object() || !body.contains("cases") || !body["cases"].is_array())
    throw PlannerError("planner response missing 'cases' array");
  std::set<std::string> allowed(spec.airfoil_candidates.begin(), spec.airfoil_candidates.end());
  domain::DesignMatrix m;
  for (const auto& c : body["cases"]) {
    if (!c.is_object() || !c.contains("airfoil") || !c.contains("velocity_ms") ||
        !c.contains("aoa_deg") || !c["airfoil"].is_string() || !c["velocity_ms"].is_number() ||
        !c["aoa_deg"].is_number())
      throw PlannerError("planner response case fails schema validation");
    domain::CaseConfig cc;
    cc.airfoil = c["airfoil"].get<std::string>();
    if (!allowed.count(cc.airfoil))
      throw PlannerError("planner proposed an airfoil outside the candidate list: " + cc.airfoil);
    cc.velocity_ms = c["velocity_ms"].get<double>();
    cc.aoa_deg = c["aoa_deg"].get<double>();
    if (cc.velocity_ms <= 0) throw PlannerError("planner proposed a non-positive velocity");
    if (cc.aoa_deg < spec.aoa_range.min_deg - 1e-9 || cc.aoa_deg > spec.aoa_range.max_deg + 1e-9)
      throw PlannerError("planner proposed an angle outside the requested range");
    cc.chord_m = spec.chord_m;
    cc.kinematic_viscosity_m2_s = spec.kinematic_viscosity_m2_s;
    cc.reynolds = aero::reynolds(cc.velocity_ms, cc.chord_m, cc.kinematic_viscosity_m2_s);
    cc.case_id = case_id_for(cc.airfoil, cc.velocity_ms, cc.aoa_deg);
    m.cases.push_back(std::move(cc));
  }
  if (m.cases.empty()) throw PlannerError("planner response contained no cases");
  auto violations = domain::validate(m);
  if (!violations.empty())
    throw PlannerError("planner response invalid: " + domain::describe(violations));
  return m;
}

domain::DesignMatrix RemoteBackend::generate_matrix(const domain::RequirementSpec& spec,
                                                    std::uint64_t seed) {
  httplib::Client client(base_url_);
  client.set_read_timeout(30, 0);
  httplib::Headers headers;
  if (!api_token_.empty()) headers.emplace("Authorization", "Bearer " + api_token_);
  json request{{"spec", spec}, {"seed", seed}};
  auto res = client.Post("/plan", headers, request.dump(), "application/json");
  if (!res) throw PlannerError("planner endpoint unreachable: " + base_url_);
  if (res->status != 200)
    throw PlannerError("planner endpoint returned status " + std::to_string(res->status));
  if (res->body.size() > kMaxResponseBytes)
    throw PlannerError("planner response exceeds the size cap");
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception& e) {
    throw PlannerError(std::string("planner response is not valid JSON: ") + e.what());
  }
  return parse_response(body, spec);
}

std::unique_ptr<PlannerBackend> make_backend(const std::string& kind, const std::string& url) {
  if (kind == "scripted") return std::make_unique<ScriptedBackend>();
  if (kind == "remote") {
    if (url.empty()) throw PlannerError("remote planner selected but no endpoint URL configured");
    return std::make_unique<RemoteBackend>(url);
  }
  throw PlannerError("unknown planner backend: " + kind);
}

TaskGraph build_task_graph(const domain::DesignMatrix& matrix, const domain::RequirementSpec& spec,
                           std::size_t sweep_size) {
  if (matrix.cases.empty()) throw PlannerError("cannot build a task graph from an empty matrix");
  TaskGraph g;
  std::vector<std::string> selection_deps;
  for (const auto& c : matrix.cases) {
    json payload{{"case_id", c.case_id}};
    TaskNode geom{"geometry." + c.case_id, workspace::AgentRole::geometry, "geometry", payload,
                  {},   TaskStatus::kPending,
                  0.0,  0};
    TaskNode aero{"aero." + c.case_id,
                  workspace::AgentRole::aero,
                  "aero",
                  payload,
                  {geom.task_id},
                  TaskStatus::kPending,
                  0.0,
                  0};
    TaskNode acou{"acoustics." + c.case_id,
                  workspace::AgentRole::acoustics,
                  "acoustics",
                  payload,
                  {aero.task_id},
                  TaskStatus::kPending,
                  0.0,
                  0};
    selection_deps.push_back(aero.task_id);
    selection_deps.push_back(acou.task_id);
    g.nodes.push_back(std::move(geom));
    g.nodes.push_back(std::move(aero));
    g.nodes.push_back(std::move(acou));
  }

  TaskNode select{"select",
                  workspace::AgentRole::optimizer,
                  "select",
                  json{{"aero_weight", spec.aero_weight}, {"noise_weight", spec.noise_weight}},
                  selection_deps,
                  TaskStatus::kPending,
                  0.0,
                  0};
  g.nodes.push_back(select);

  std::vector<std::string> sweep_ids;
  for (std::size_t i = 0; i < sweep_size; ++i) {
    TaskNode entry{"struct." + std::to_string(i),
                   workspace::AgentRole::structures,
                   "struct_entry",
                   json{{"sweep_index", i}},
                   {"select"},
                   TaskStatus::kPending,
                   0.0,
                   0};
    sweep_ids.push_back(entry.task_id);
    g.nodes.push_back(std::move(entry));
  }
  TaskNode aggregate{"struct.aggregate", workspace::AgentRole::structures, "struct_aggregate",
                     json::object(),     sweep_ids,
                     TaskStatus::kPending, 0.0, 0};
  g.nodes.push_back(aggregate);
  TaskNode optimize{"optimize",
                    workspace::AgentRole::optimizer,
                    "optimize",
                    json::object(),
                    {"struct.aggregate"},
                    TaskStatus::kPending,
                    0.0,
                    0};
  g.nodes.push_back(optimize);
  return g;
}

SelectionOutcome select_airfoil(const std::vector<CasePerformance>& results, double aero_weight,
                                double noise_weight) {
  std::vector<CasePerformance> usable;
  for (const auto& r : results)
    if (r.converged) usable.push_back(r);
  if (usable.empty()) throw PlannerError("all cases failed: nothing to select from");

  double ld_max = -std::numeric_limits<double>::infinity();
  double oaspl_min = std::numeric_limits<double>::infinity();
  double oaspl_max = -std::numeric_limits<double>::infinity();
  for (const auto& r : usable) {
    ld_max = std::max(ld_max, r.lift_to_drag);
    oaspl_min = std::min(oaspl_min, r.oaspl_db);
    oaspl_max = std::max(oaspl_max, r.oaspl_db);
  }
  const bool degenerate = (oaspl_max - oaspl_min) <= 1e-12;

  SelectionOutcome out;
  out.degenerate_noise = degenerate;
  for (const auto& r : usable) {
    double aero_term = ld_max > 0 ? r.lift_to_drag / ld_max : 0.0;
    // all-equal OASPL removes acoustics from differentiation
    double noise_term =
        degenerate ? 1.0 : 1.0 - (r.oaspl_db - oaspl_min) / (oaspl_max - oaspl_min);
    out.ranking.push_back(
        {r.case_id, r.airfoil, aero_weight * aero_term + noise_weight * noise_term,
         r.lift_to_drag, r.oaspl_db});
  }
  std::sort(out.ranking.begin(), out.ranking.end(), [](const RankedCase& a, const RankedCase& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.lift_to_drag != b.lift_to_drag) return a.lift_to_drag > b.lift_to_drag;
    return a.case_id < b.case_id;
  });
  out.winner_case_id = out.ranking.front().case_id;
  out.winner_airfoil = out.ranking.front().airfoil;
  return out;
}

std::string matrix_csv(const domain::DesignMatrix& matrix) {
  std::ostringstream ss;
  ss << "simulation,case_id,airfoil,chord_m,reynolds,velocity_ms,aoa_deg\n";
  for (std::size_t i = 0; i < matrix.cases.size(); ++i) {
    const auto& c = matrix.cases[i];
    ss << (i + 1) << "," << c.case_id << "," << c.airfoil << "," << num_str(c.chord_m) << ","
       << num_str(c.reynolds) << "," << num_str(c.velocity_ms) << "," << num_str(c.aoa_deg) << "\n";
  }
  return ss.str();
}

std::string aerodynamics_plan_md(const domain::RequirementSpec& spec,
                                 const domain::DesignMatrix& matrix) {
  std::ostringstream ss;
  ss << "# Aerodynamic analysis plan\n\n"
     << "Objective: " << spec.objective_text << "\n\n"
     << "- solver: simpleFoam (steady RANS), turbulence model Spalart-Allmaras\n"
     << "- relaxation: pressure 0.3, velocity 0.7\n"
     << "- mesh: structured C-type, 40k-45k nodes per case\n"
     << "- outputs: force coefficients, boundary-layer parameters per case\n\n"
     << "## Simulation matrix\n\n"
     << "| # | Airfoil | Chord (m) | Reynolds | Velocity (m/s) | AoA (deg) |\n"
     << "|---|---------|-----------|----------|----------------|-----------|\n";
  for (std::size_t i = 0; i < matrix.cases.size(); ++i) {
    const auto& c = matrix.cases[i];
    ss << "| " << (i + 1) << " | " << c.airfoil << " | " << num_str(c.chord_m) << " | "
       << num_str(c.reynolds) << " | " << num_str(c.velocity_ms) << " | " << num_str(c.aoa_deg)
       << " |\n";
  }
  return ss.str();
}

std::string acoustics_plan_md(const domain::RequirementSpec& spec) {
  std::ostringstream ss;
  ss << "# Acoustic analysis plan\n\n"
     << "- model: trailing-edge self-noise correlations over the boundary-layer state\n"
     << "- mechanisms: turbulent-boundary-layer trailing edge, separation, laminar vortex "
        "shedding (blunt trailing edge and tip vortex available, off for this wing)\n"
     << "- band: 100 Hz to 10 kHz, one-third-octave centers\n"
     << "- observers: 1.0 m and 2.0 m perpendicular to the chord line\n"
     << "- metrics: SPL spectrum, OASPL, A- and C-weighted levels, directivity\n"
     << "- weighting between aerodynamics and noise: " << num_str(spec.aero_weight) << " / "
     << num_str(spec.noise_weight) << "\n";
  return ss.str();
}

}  // namespace aeroforge::planner
