#include "aeroforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "aeroforge/acoustics.hpp"
#include "aeroforge/aero.hpp"
#include "aeroforge/geometry.hpp"
#include "aeroforge/knowledge.hpp"
#include "aeroforge/optimizer.hpp"
#include "aeroforge/recovery.hpp"
#include "aeroforge/structures.hpp"
#include "aeroforge/util.hpp"
#include "aeroforge/workspace.hpp"

namespace aeroforge::pipeline {

using nlohmann::json;
using util::num_str;
using workspace::AgentRole;
using workspace::ProjectWorkspace;

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::kSuccess: return 0;
    case RunStatus::kValidationFailure: return 2;
    case RunStatus::kExecutionFailure: return 3;
    case RunStatus::kInterrupted: return 4;
    case RunStatus::kNoCheckpoint: return 3;
  }
  return 3;
}

domain::RequirementSpec load_spec_file(const fs::path& spec_path) {
  return json::parse(util::read_file(spec_path)).get<domain::RequirementSpec>();
}

namespace {

std::string phase_of_kind(const std::string& kind) {
  if (kind == "geometry") return "geometry";
  if (kind == "aero") return "aero";
  if (kind == "acoustics") return "acoustics";
  if (kind == "select") return "selection";
  if (kind == "struct_entry" || kind == "struct_aggregate") return "structures";
  if (kind == "optimize") return "optimization";
  return "other";
}

struct PipelineContext {
  domain::RequirementSpec spec;
  domain::DesignMatrix matrix;
  PipelineOptions options;
  ProjectWorkspace* ws = nullptr;
  recovery::CheckpointStore* store = nullptr;
  recovery::LogClassifier classifier;
  std::vector<domain::StructConfig> sweep_configs;
  planner::TaskGraph* graph = nullptr;

  std::mutex mu;
  std::map<std::string, geometry::AirfoilCoordinates> coords_cache;
  std::map<std::string, recovery::SolverParams> case_params;
  std::vector<structures::LoadCase> loads;  // resolved after selection
  bool loads_ready = false;
  std::size_t stage_count = 0;
  std::map<std::string, std::size_t> phase_remaining;
  std::string current_phase = "plan";

  const domain::CaseConfig& case_by_id(const std::string& id) const {
    for (const auto& c : matrix.cases)
      if (c.case_id == id) return c;
    throw std::runtime_error("unknown case id: " + id);
  }

  const geometry::AirfoilCoordinates& coords_for(const std::string& airfoil) {
    std::scoped_lock lk(mu);
    auto it = coords_cache.find(airfoil);
    if (it == coords_cache.end()) {
      auto spec_a = geometry::parse_designator(airfoil);
      it = coords_cache.emplace(airfoil, geometry::generate(spec_a, 120)).first;
    }
    return it->second;
  }
};

json snapshot_state(const PipelineContext& ctx, const planner::TaskGraph& graph,
                    const std::string& phase) {
  return json{{"spec", ctx.spec},
              {"matrix", ctx.matrix},
              {"graph", graph},
              {"seed", ctx.options.seed},
              {"planner", ctx.options.planner_kind},
              {"solver", ctx.options.solver},
              {"phase", phase},
              {"stage_count", ctx.stage_count}};
}

// ---- per-role executors ----

void run_geometry_task(PipelineContext& ctx, const planner::TaskNode& node) {
  const auto& c = ctx.case_by_id(node.payload.at("case_id").get<std::string>());
  const auto& coords = ctx.coords_for(c.airfoil);
  const std::string d = ProjectWorkspace::case_dir_name(c);
  ctx.ws->publish(AgentRole::geometry, d + "/airfoil.dat", geometry::to_selig(coords), true);
  ctx.ws->publish(AgentRole::geometry, d + "/airfoil_coordinates.csv", geometry::to_csv(coords), true);
  ctx.ws->publish(AgentRole::geometry, d + "/airfoil.geo", geometry::to_geo(coords, c.chord_m), true);
}

void run_aero_task(PipelineContext& ctx, const planner::TaskNode& node) {
  const auto& c = ctx.case_by_id(node.payload.at("case_id").get<std::string>());
  const auto& coords = ctx.coords_for(c.airfoil);
  auto airfoil = geometry::parse_designator(c.airfoil);

  recovery::SolverParams params;
  {
    std::scoped_lock lk(ctx.mu);
    auto it = ctx.case_params.find(c.case_id);
    if (it != ctx.case_params.end()) params = it->second;
  }
  aero::CaseBuildOptions opts;
  opts.relaxation_pressure = params.relaxation_pressure;
  opts.relaxation_velocity = params.relaxation_velocity;

  aero::build_case(*ctx.ws, c, coords, opts);
  if (ctx.options.solver == "desk") {
    aero::run_desk_case(*ctx.ws, c, airfoil, coords, ctx.spec.span_m, {}, opts);
  }
  // adapter mode expects the external runner to have produced the outputs
  aero::extract_results(*ctx.ws, c);
}

acoustics::BpmInput bpm_input_from_document(const json& doc) {
  acoustics::BpmInput in;
  in.chord_m = doc.at("chord_m").get<double>();
  in.span_m = doc.at("span_m").get<double>();
  in.velocity_ms = doc.at("velocity_ms").get<double>();
  in.aoa_deg = doc.at("aoa_deg").get<double>();
  in.observer_distance_m = doc.value("observer_distance_m", 1.0);
  in.observer_theta_deg = doc.value("observer_theta_deg", 90.0);
  in.observer_phi_deg = doc.value("observer_phi_deg", 90.0);
  in.tripped = doc.value("tripped", false);

  if (doc.contains("delta_star_suction_m")) {
    in.delta_star_suction_m = doc.at("delta_star_suction_m").get<double>();
    in.delta_star_pressure_m = doc.value("delta_star_pressure_m", in.delta_star_suction_m);
  } else if (doc.contains("delta_star_base_m")) {
    // anchor the correlation's angle dependence to the extracted magnitude
    const double base = doc.at("delta_star_base_m").get<double>();
    const double re = in.velocity_ms * in.chord_m / in.air.kinematic_viscosity_m2_s;
    auto bl = acoustics::boundary_layer(re, in.aoa_deg, in.tripped, in.chord_m);
    auto bl0 = acoustics::boundary_layer(re, 0.0, in.tripped, in.chord_m);
    const double k = base / bl0.suction.delta_star_m;
    in.delta_star_suction_m = bl.suction.delta_star_m * k;
    in.delta_star_pressure_m = bl.pressure.delta_star_m * k;
    in.delta_pressure_m = bl.pressure.delta_m * k;
  }
  return in;
}

void run_acoustics_task(PipelineContext& ctx, const planner::TaskNode& node) {
  const auto& c = ctx.case_by_id(node.payload.at("case_id").get<std::string>());
  const std::string d = ProjectWorkspace::case_dir_name(c);
  json doc = json::parse(ctx.ws->read_for(AgentRole::acoustics, d + "/acoustics_data/bpm_input.json"));

  auto freqs = acoustics::third_octave_centers(acoustics::kDefaultBandMin, acoustics::kDefaultBandMax);
  acoustics::BpmInput base = bpm_input_from_document(doc);
  auto spectrum = acoustics::spl_spectrum(base, acoustics::kDefaultMechanisms, freqs);

  std::ostringstream tob;
  tob << "center_hz";
  for (const auto& [m, _] : spectrum.per_mechanism_db) tob << "," << acoustics::mechanism_name(m);
  tob << ",total_db\n";
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    tob << num_str(freqs[i]);
    for (const auto& [_, spl] : spectrum.per_mechanism_db) tob << "," << num_str(spl[i]);
    tob << "," << num_str(spectrum.total_db[i]) << "\n";
  }
  ctx.ws->publish(AgentRole::acoustics, d + "/postProcessing/integrated/acoustics/third_octave_spectrum.csv",
                  tob.str(), true);

  std::ostringstream met;
  met << "case_id,observer_distance_m,oaspl_db,oaspl_dba,oaspl_dbc,peak_band_hz,peak_level_db\n";
  for (double r : {1.0, 2.0}) {
    acoustics::BpmInput in = base;
    in.observer_distance_m = r;
    auto spec_r = (r == base.observer_distance_m)
                      ? spectrum
                      : acoustics::spl_spectrum(in, acoustics::kDefaultMechanisms, freqs);
    double oa = acoustics::oaspl(spec_r.total_db);
    double oa_a = acoustics::oaspl_weighted(freqs, spec_r.total_db, acoustics::a_weighting_db);
    double oa_c = acoustics::oaspl_weighted(freqs, spec_r.total_db, acoustics::c_weighting_db);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < spec_r.total_db.size(); ++i)
      if (spec_r.total_db[i] > spec_r.total_db[peak]) peak = i;
    met << c.case_id << "," << num_str(r) << "," << num_str(oa) << "," << num_str(oa_a) << ","
        << num_str(oa_c) << "," << num_str(freqs[peak]) << "," << num_str(spec_r.total_db[peak])
        << "\n";
  }
  ctx.ws->publish(AgentRole::acoustics, d + "/postProcessing/integrated/acoustics/acoustic_metrics.csv",
                  met.str(), true);
}

struct CaseMetrics {
  double lift_to_drag = 0.0;
  double oaspl_db = 0.0;
  bool converged = false;
};

CaseMetrics read_case_metrics(PipelineContext& ctx, const domain::CaseConfig& c, AgentRole reader) {
  const std::string d = ProjectWorkspace::case_dir_name(c);
  CaseMetrics m;
  auto force = util::split(
      ctx.ws->read_for(reader, d + "/postProcessing/integrated/force_coefficients.csv"), '\n');
  if (force.size() >= 2) {
    auto fields = util::split(force[1], ',');
    auto header = util::split(force[0], ',');
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
      if (header[i] == "lift_to_drag") m.lift_to_drag = util::parse_double(fields[i]);
      if (header[i] == "converged") m.converged = fields[i] == "true";
    }
  }
  auto metrics = util::split(
      ctx.ws->read_for(reader, d + "/postProcessing/integrated/acoustics/acoustic_metrics.csv"), '\n');
  if (metrics.size() >= 2) {
    auto header = util::split(metrics[0], ',');
    auto fields = util::split(metrics[1], ',');  // first observer row (1.0 m)
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i)
      if (header[i] == "oaspl_db") m.oaspl_db = util::parse_double(fields[i]);
  }
  return m;
}

void run_select_task(PipelineContext& ctx, const planner::TaskNode& node) {
  std::map<std::string, std::pair<double, double>> fixture;  // case_id -> (L/D, OASPL)
  if (!ctx.options.fixture_results.empty()) {
    json f = json::parse(util::read_file(ctx.options.fixture_results));
    for (const auto& e : f.at("cases")) {
      for (const auto& c : ctx.matrix.cases) {
        if (c.airfoil == e.at("airfoil").get<std::string>() &&
            std::fabs(c.velocity_ms - e.at("velocity_ms").get<double>()) < 1e-9) {
          fixture[c.case_id] = {e.at("lift_to_drag").get<double>(), e.at("oaspl_db").get<double>()};
        }
      }
    }
  }

  std::vector<planner::CasePerformance> perf;
  for (const auto& c : ctx.matrix.cases) {
    CaseMetrics m = read_case_metrics(ctx, c, AgentRole::optimizer);
    planner::CasePerformance p{c.case_id, c.airfoil, m.lift_to_drag, m.oaspl_db, m.converged};
    auto it = fixture.find(c.case_id);
    if (it != fixture.end()) {
      p.lift_to_drag = it->second.first;
      p.oaspl_db = it->second.second;
    }
    perf.push_back(p);
  }

  auto outcome = planner::select_airfoil(perf, node.payload.at("aero_weight").get<double>(),
                                         node.payload.at("noise_weight").get<double>());
  json ranking = json::array();
  for (const auto& r : outcome.ranking)
    ranking.push_back({{"case_id", r.case_id},
                       {"airfoil", r.airfoil},
                       {"score", r.score},
                       {"lift_to_drag", r.lift_to_drag},
                       {"oaspl_db", r.oaspl_db}});
  json sel{{"winner_case_id", outcome.winner_case_id},
           {"winner_airfoil", outcome.winner_airfoil},
           {"degenerate_noise", outcome.degenerate_noise},
           {"fixture_injected", !fixture.empty()},
           {"ranking", ranking}};
  ctx.ws->publish(AgentRole::optimizer, "airfoil/selection.json", sel.dump(2) + "\n", true);
  ctx.ws->log("selection winner: " + outcome.winner_airfoil + " (" + outcome.winner_case_id + ")");
}

const std::vector<structures::LoadCase>& resolve_loads(PipelineContext& ctx) {
  std::scoped_lock lk(ctx.mu);
  if (!ctx.loads_ready) {
    json sel = json::parse(ctx.ws->read_for(AgentRole::structures, "airfoil/selection.json"));
    const auto& winner = ctx.case_by_id(sel.at("winner_case_id").get<std::string>());
    const std::string d = ProjectWorkspace::case_dir_name(winner);
    auto lines = util::split(
        ctx.ws->read_for(AgentRole::structures, d + "/postProcessing/integrated/force_coefficients.csv"),
        '\n');
    domain::FlowResult flow;
    flow.converged = true;
    auto header = util::split(lines[0], ',');
    auto fields = util::split(lines[1], ',');
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
      if (header[i] == "cl") flow.cl = util::parse_double(fields[i]);
      if (header[i] == "cd") flow.cd = util::parse_double(fields[i]);
    }
    ctx.loads = structures::load_cases(ctx.spec, winner, flow);
    ctx.loads_ready = true;
  }
  return ctx.loads;
}

std::string winner_airfoil_name(PipelineContext& ctx) {
  json sel = json::parse(ctx.ws->read_for(AgentRole::structures, "airfoil/selection.json"));
  return sel.at("winner_airfoil").get<std::string>();
}

void run_struct_entry_task(PipelineContext& ctx, const planner::TaskNode& node) {
  const std::size_t idx = node.payload.at("sweep_index").get<std::size_t>();
  const auto& config = ctx.sweep_configs.at(idx);
  const auto& loads = resolve_loads(ctx);
  const auto& coords = ctx.coords_for(winner_airfoil_name(ctx));
  auto result = structures::evaluate_config(config, loads, coords, ctx.spec.chord_m,
                                            ctx.spec.span_m, ctx.spec.material);
  ctx.ws->publish(AgentRole::structures,
                  "structural/configs/" + structures::config_id(config) + "/result.json",
                  json(result).dump(2) + "\n", true);
}

void run_struct_aggregate_task(PipelineContext& ctx, const planner::TaskNode&) {
  std::vector<domain::StructResult> results;
  for (const auto& config : ctx.sweep_configs) {
    json j = json::parse(ctx.ws->read_for(
        AgentRole::structures, "structural/configs/" + structures::config_id(config) + "/result.json"));
    results.push_back(j.get<domain::StructResult>());
  }
  const auto& loads = resolve_loads(ctx);
  ctx.ws->publish(AgentRole::structures, "structural/structural_sweep.csv",
                  structures::sweep_csv(results, loads), true);
  ctx.ws->log("structural sweep aggregated: " + std::to_string(results.size()) + " configurations");
}

double worst_stress(const domain::StructResult& r) {
  double w = 0.0;
  for (const auto& [_, s] : r.max_von_mises_mpa) w = std::max(w, s);
  return w;
}

void run_optimize_task(PipelineContext& ctx, const planner::TaskNode&) {
  auto results = structures::parse_sweep_csv(
      ctx.ws->read_for(AgentRole::optimizer, "structural/structural_sweep.csv"));
  std::vector<std::vector<double>> xs;
  std::vector<double> stress, mass;
  for (const auto& r : results) {
    xs.push_back({r.config.spar_width_mm, r.config.rib_thickness_mm, r.config.shell_thickness_mm,
                  static_cast<double>(r.config.n_spars), static_cast<double>(r.config.n_ribs)});
    stress.push_back(worst_stress(r));
    mass.push_back(r.mass_g);
  }

  opt::GpConfig gc;
  gc.seed = ctx.options.seed;
  gc.multistarts = ctx.options.gp_multistarts;
  gc.nm_iterations = ctx.options.gp_refine_iterations;
  auto [stress_model, stress_report] = opt::train(xs, stress, ctx.options.seed, gc);
  auto [mass_model, mass_report] = opt::train(xs, mass, ctx.options.seed + 1, gc);

  {
    std::ostringstream ss;
    ss << "target,r2,rmse,n_train,n_test,flat_warning\n";
    ss << "stress," << num_str(stress_report.r2) << "," << num_str(stress_report.rmse) << ","
       << stress_report.n_train << "," << stress_report.n_test << ","
       << (stress_report.flat_model_warning ? "true" : "false") << "\n";
    ss << "mass," << num_str(mass_report.r2) << "," << num_str(mass_report.rmse) << ","
       << mass_report.n_train << "," << mass_report.n_test << ","
       << (mass_report.flat_model_warning ? "true" : "false") << "\n";
    ctx.ws->publish(AgentRole::optimizer, "optimization/gp_validation.csv", ss.str(), true);
  }
  {
    // predicted-vs-actual and uncertainty, one row per sweep point
    std::ostringstream ss;
    ss << "config_id,actual_stress_mpa,predicted_stress_mpa,stress_sigma,actual_mass_g,"
          "predicted_mass_g,mass_sigma\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto ps = stress_model.predict(xs[i]);
      auto pm = mass_model.predict(xs[i]);
      ss << structures::config_id(results[i].config) << "," << num_str(stress[i]) << ","
         << num_str(ps.mean) << "," << num_str(ps.sigma) << "," << num_str(mass[i]) << ","
         << num_str(pm.mean) << "," << num_str(pm.sigma) << "\n";
    }
    ctx.ws->publish(AgentRole::optimizer, "optimization/prediction_accuracy.csv", ss.str(), true);
  }

  // continuous search conditioned on the integer parameters
  const auto& loads = resolve_loads(ctx);
  const auto& coords = ctx.coords_for(winner_airfoil_name(ctx));
  structures::SweepBounds bounds;
  opt::BoProblem problem;
  problem.x_min = {bounds.spar_width_min, bounds.rib_thickness_min, bounds.shell_thickness_min};
  problem.x_max = {bounds.spar_width_max, bounds.rib_thickness_max, bounds.shell_thickness_max};
  problem.combos = {{2, 2}, {2, 3}, {3, 2}, {3, 3}};
  problem.evaluate = [&](const std::vector<double>& x,
                         std::pair<int, int> combo) -> std::array<double, 2> {
    domain::StructConfig c{x[0], x[1], x[2], combo.first, combo.second};
    auto r = structures::evaluate_config(c, loads, coords, ctx.spec.chord_m, ctx.spec.span_m,
                                         ctx.spec.material);
    return {worst_stress(r), r.mass_g};
  };

  std::vector<opt::BoEvaluation> initial;
  for (std::size_t i = 0; i < results.size(); ++i) {
    initial.push_back({{results[i].config.spar_width_mm, results[i].config.rib_thickness_mm,
                        results[i].config.shell_thickness_mm},
                       {results[i].config.n_spars, results[i].config.n_ribs},
                       stress[i],
                       mass[i]});
  }
  auto bo = opt::optimize(problem, initial, ctx.options.bo_budget, ctx.options.seed, gc);

  {
    std::ostringstream ss;
    ss << "stress_mpa,mass_g,spar_width_mm,rib_thickness_mm,shell_thickness_mm,n_spars,n_ribs\n";
    for (const auto& p : bo.front) {
      const auto& e = bo.evaluated[p.index];
      ss << num_str(p.f1) << "," << num_str(p.f2) << "," << num_str(e.x[0]) << ","
         << num_str(e.x[1]) << "," << num_str(e.x[2]) << "," << e.combo.first << ","
         << e.combo.second << "\n";
    }
    ctx.ws->publish(AgentRole::optimizer, "optimization/pareto_front.csv", ss.str(), true);
  }
  {
    std::ostringstream ss;
    ss << "# Optimization report\n\n"
       << "- surrogate validation: stress R2 " << num_str(stress_report.r2) << " (RMSE "
       << num_str(stress_report.rmse) << " MPa), mass R2 " << num_str(mass_report.r2) << " (RMSE "
       << num_str(mass_report.rmse) << " g)\n"
       << "- evaluations: " << bo.evaluated.size() << " total (" << initial.size()
       << " sweep + " << (bo.evaluated.size() - initial.size()) << " proposals)\n"
       << "- best discrete stress: " << num_str(bo.best_discrete_f1) << " MPa\n"
       << "- best verified stress: " << num_str(bo.best.f1) << " MPa at " << num_str(bo.best.f2)
       << " g\n"
       << "- best design: spar " << num_str(bo.best.x[0]) << " mm, rib " << num_str(bo.best.x[1])
       << " mm, shell " << num_str(bo.best.x[2]) << " mm, " << bo.best.combo.first << " spars, "
       << bo.best.combo.second << " ribs\n"
       << "- improvement over best discrete: " << num_str(100.0 * bo.improvement_fraction)
       << " %\n"
       << "- Pareto-optimal designs: " << bo.front.size() << "\n";
    ctx.ws->publish(AgentRole::optimizer, "optimization/optimization_report.md", ss.str(), true);
  }
  json summary{{"best_stress_mpa", bo.best.f1},
               {"best_mass_g", bo.best.f2},
               {"best_discrete_stress_mpa", bo.best_discrete_f1},
               {"improvement_fraction", bo.improvement_fraction},
               {"pareto_size", bo.front.size()},
               {"gp_stress_r2", stress_report.r2},
               {"gp_mass_r2", mass_report.r2}};
  ctx.ws->publish(AgentRole::optimizer, "optimization/summary.json", summary.dump(2) + "\n", true);
}

// ---- reporting ----

void write_multi_case_csvs(PipelineContext& ctx) {
  std::ostringstream aerocsv, acoucsv;
  aerocsv << "case_id,airfoil,velocity_ms,aoa_deg,reynolds,cl,cd,cm,lift_to_drag,delta_star_m,"
             "theta_m,shape_factor\n";
  acoucsv << "case_id,airfoil,velocity_ms,aoa_deg,oaspl_db,oaspl_dba,oaspl_dbc,peak_band_hz\n";
  for (const auto& c : ctx.matrix.cases) {
    const std::string d = ProjectWorkspace::case_dir_name(c);
    if (!ctx.ws->has_artifact(d + "/postProcessing/integrated/force_coefficients.csv")) continue;
    auto fc = util::split(
        ctx.ws->read_for(AgentRole::planner, d + "/postProcessing/integrated/force_coefficients.csv"),
        '\n');
    auto bl = util::split(
        ctx.ws->read_for(AgentRole::planner, d + "/postProcessing/integrated/boundary_layer.csv"), '\n');
    std::map<std::string, std::string> row;
    {
      auto h = util::split(fc[0], ','), v = util::split(fc[1], ',');
      for (std::size_t i = 0; i < h.size() && i < v.size(); ++i) row[h[i]] = v[i];
      auto hb = util::split(bl[0], ','), vb = util::split(bl[1], ',');
      for (std::size_t i = 0; i < hb.size() && i < vb.size(); ++i) row[hb[i]] = vb[i];
    }
    aerocsv << c.case_id << "," << c.airfoil << "," << num_str(c.velocity_ms) << ","
            << num_str(c.aoa_deg) << "," << num_str(c.reynolds) << "," << row["cl"] << ","
            << row["cd"] << "," << row["cm"] << "," << row["lift_to_drag"] << ","
            << row["delta_star_m"] << "," << row["theta_m"] << "," << row["shape_factor"] << "\n";

    const std::string mpath = d + "/postProcessing/integrated/acoustics/acoustic_metrics.csv";
    if (ctx.ws->has_artifact(mpath)) {
      auto mc = util::split(ctx.ws->read_for(AgentRole::planner, mpath), '\n');
      auto h = util::split(mc[0], ','), v = util::split(mc[1], ',');
      std::map<std::string, std::string> arow;
      for (std::size_t i = 0; i < h.size() && i < v.size(); ++i) arow[h[i]] = v[i];
      acoucsv << c.case_id << "," << c.airfoil << "," << num_str(c.velocity_ms) << ","
              << num_str(c.aoa_deg) << "," << arow["oaspl_db"] << "," << arow["oaspl_dba"] << ","
              << arow["oaspl_dbc"] << "," << arow["peak_band_hz"] << "\n";
    }
  }
  ctx.ws->publish(AgentRole::planner, "airfoil/multi_case_analysis/aerodynamic_data.csv",
                  aerocsv.str(), true);
  ctx.ws->publish(AgentRole::planner, "airfoil/multi_case_analysis/acoustic_data.csv", acoucsv.str(),
                  true);
}

void write_result_md(PipelineContext& ctx) {
  std::ostringstream ss;
  ss << "# Project result\n\n";
  ss << "Objective: " << ctx.spec.objective_text << "\n\n";
  ss << "## Case matrix\n\n" << ctx.matrix.cases.size() << " cases analyzed.\n\n";

  if (ctx.ws->has_artifact("airfoil/selection.json")) {
    json sel = json::parse(ctx.ws->read_for(AgentRole::planner, "airfoil/selection.json"));
    ss << "## Airfoil selection\n\n";
    ss << "Winner: **" << sel.at("winner_airfoil").get<std::string>() << "** (case "
       << sel.at("winner_case_id").get<std::string>() << ")";
    if (sel.value("degenerate_noise", false))
      ss << " - acoustic levels were identical across cases, so the ranking is aerodynamic\n";
    ss << "\n\n| Rank | Case | Airfoil | J | L/D | OASPL (dB) |\n"
       << "|------|------|---------|---|-----|------------|\n";
    int rank = 1;
    for (const auto& r : sel.at("ranking")) {
      ss << "| " << rank++ << " | " << r.at("case_id").get<std::string>() << " | "
         << r.at("airfoil").get<std::string>() << " | " << num_str(r.at("score").get<double>())
         << " | " << num_str(r.at("lift_to_drag").get<double>()) << " | "
         << num_str(r.at("oaspl_db").get<double>()) << " |\n";
    }
    ss << "\n";
  } else {
    ss << "## Airfoil selection\n\nnot completed\n\n";
  }

  if (ctx.ws->has_artifact("structural/structural_sweep.csv")) {
    auto results = structures::parse_sweep_csv(
        ctx.ws->read_for(AgentRole::planner, "structural/structural_sweep.csv"));
    double mass_lo = 1e30, mass_hi = 0, stress_lo = 1e30, stress_hi = 0;
    for (const auto& r : results) {
      mass_lo = std::min(mass_lo, r.mass_g);
      mass_hi = std::max(mass_hi, r.mass_g);
      double w = worst_stress(r);
      stress_lo = std::min(stress_lo, w);
      stress_hi = std::max(stress_hi, w);
    }
    ss << "## Structural sweep\n\n"
       << "- configurations: " << results.size() << "\n"
       << "- mass range: " << num_str(mass_lo) << " - " << num_str(mass_hi) << " g\n"
       << "- peak stress range: " << num_str(stress_lo) << " - " << num_str(stress_hi)
       << " MPa\n\n";
  } else {
    ss << "## Structural sweep\n\nnot completed\n\n";
  }

  if (ctx.ws->has_artifact("optimization/summary.json")) {
    json o = json::parse(ctx.ws->read_for(AgentRole::planner, "optimization/summary.json"));
    ss << "## Optimization\n\n"
       << "- best verified stress: " << num_str(o.at("best_stress_mpa").get<double>()) << " MPa at "
       << num_str(o.at("best_mass_g").get<double>()) << " g\n"
       << "- improvement over best discrete: "
       << num_str(100.0 * o.at("improvement_fraction").get<double>()) << " %\n"
       << "- Pareto-optimal designs: " << o.at("pareto_size").get<std::size_t>() << "\n"
       << "- surrogate R2: stress " << num_str(o.at("gp_stress_r2").get<double>()) << ", mass "
       << num_str(o.at("gp_mass_r2").get<double>()) << "\n";
  } else {
    ss << "## Optimization\n\nnot completed\n";
  }
  ctx.ws->publish(AgentRole::planner, "airfoil/result.md", ss.str(), true);
}

// ---- graph execution with recovery and checkpoints ----

scheduler::RunReport execute_graph(PipelineContext& ctx, planner::TaskGraph& graph) {
  scheduler::SchedulerConfig sc;
  sc.max_parallel = ctx.options.serial ? 1 : ctx.options.max_parallel;
  scheduler::Scheduler sched(sc);

  auto audit_prefix = [&ctx](const planner::TaskNode& node) -> std::string {
    if (node.payload.contains("case_id"))
      return ProjectWorkspace::case_dir_name(
                 ctx.case_by_id(node.payload["case_id"].get<std::string>())) +
             "/";
    if (node.kind == "struct_entry")
      return "structural/configs/" +
             structures::config_id(
                 ctx.sweep_configs.at(node.payload.at("sweep_index").get<std::size_t>())) +
             "/";
    if (node.kind == "struct_aggregate") return "structural/structural_sweep.csv";
    if (node.kind == "select") return "airfoil/selection.json";
    if (node.kind == "optimize") return "optimization/";
    return "";
  };

  auto wrap = [&](std::function<void(PipelineContext&, const planner::TaskNode&)> body) {
    return [&ctx, body, audit_prefix](planner::TaskNode& node) {
      recovery::RetryOptions retry_opts;
      retry_opts.wait_seconds = ctx.options.retry_wait;  // may be null -> real sleep
      const std::string prefix = audit_prefix(node);
      retry_opts.validate_integrity = [&ctx, prefix](const json&) {
        // the task's own outputs must match their ledger digests
        return ctx.ws->audit_digests(prefix).empty();
      };
      auto exec = [&](const json&, const recovery::SolverParams& params) -> json {
        {
          std::scoped_lock lk(ctx.mu);
          if (node.payload.contains("case_id"))
            ctx.case_params[node.payload["case_id"].get<std::string>()] = params;
        }
        body(ctx, node);
        return json{{"ok", true}};
      };
      recovery::SolverParams params;
      {
        std::scoped_lock lk(ctx.mu);
        if (node.payload.contains("case_id")) {
          auto it = ctx.case_params.find(node.payload["case_id"].get<std::string>());
          if (it != ctx.case_params.end()) params = it->second;
        }
      }
      auto outcome =
          recovery::retry_loop(json::object(), params, exec, ctx.classifier, nullptr, retry_opts);
      node.attempts = outcome.attempts;
      if (!outcome.success) {
        ctx.ws->log("task failed after " + std::to_string(outcome.attempts) +
                    " attempts: " + node.task_id);
        throw scheduler::TaskExecutionError("task failed: " + node.task_id);
      }
    };
  };

  sched.register_executor(AgentRole::geometry, wrap(run_geometry_task));
  sched.register_executor(AgentRole::aero, wrap(run_aero_task));
  sched.register_executor(AgentRole::acoustics, wrap(run_acoustics_task));
  sched.register_executor(AgentRole::structures, wrap([](PipelineContext& c, const planner::TaskNode& n) {
                            if (n.kind == "struct_entry") run_struct_entry_task(c, n);
                            else run_struct_aggregate_task(c, n);
                          }));
  sched.register_executor(AgentRole::optimizer, wrap([](PipelineContext& c, const planner::TaskNode& n) {
                            if (n.kind == "select") run_select_task(c, n);
                            else run_optimize_task(c, n);
                          }));

  // phase bookkeeping for checkpoint cadence and interrupts
  {
    std::scoped_lock lk(ctx.mu);
    ctx.phase_remaining.clear();
    for (const auto& n : graph.nodes)
      if (n.status != planner::TaskStatus::kDone) ctx.phase_remaining[phase_of_kind(n.kind)]++;
  }

  const std::size_t total = graph.nodes.size();
  sched.set_completion_callback([&](const planner::TaskGraph& snapshot,
                                    const planner::TaskNode& completed) {
    // serialized by the scheduler lock
    ctx.stage_count++;
    const std::string phase = phase_of_kind(completed.kind);
    ctx.current_phase = phase;
    std::size_t done = 0;
    for (const auto& n : snapshot.nodes)
      if (n.status == planner::TaskStatus::kDone) done++;
    double progress = 100.0 * static_cast<double>(done) / static_cast<double>(total);

    bool phase_boundary = false;
    auto it = ctx.phase_remaining.find(phase);
    if (it != ctx.phase_remaining.end() && it->second > 0 && --it->second == 0)
      phase_boundary = true;

    if (phase_boundary || (ctx.stage_count % static_cast<std::size_t>(std::max(
                                                  1, ctx.options.checkpoint_interval)) == 0)) {
      ctx.store->save(phase, progress, snapshot_state(ctx, snapshot, phase));
    }
    ctx.ws->log("task " + completed.task_id + " -> " + planner::status_name(completed.status));

    if (phase_boundary && ctx.options.stop_after_phase == phase) sched.request_stop();
    if (ctx.options.interrupt_flag && ctx.options.interrupt_flag->load()) sched.request_stop();
  });

  auto report = sched.run(graph);
  if (report.interrupted) {
    ctx.store->save(ctx.current_phase, 0.0, snapshot_state(ctx, graph, ctx.current_phase));
  }
  return report;
}

RunSummary finish(PipelineContext& ctx, const scheduler::RunReport& report) {
  RunSummary summary;
  summary.tasks_done = report.done_count;
  summary.tasks_failed = report.failed_count;

  write_multi_case_csvs(ctx);
  write_result_md(ctx);

  {
    json nodes = json::array();
    for (const auto& n : report.nodes)
      nodes.push_back({{"task_id", n.task_id},
                       {"status", planner::status_name(n.status)},
                       {"wall_seconds", n.wall_seconds},
                       {"attempts", n.attempts}});
    json run_report{{"nodes", nodes},
                    {"makespan_seconds", report.makespan_seconds},
                    {"max_observed_parallel", report.max_observed_parallel},
                    {"interrupted", report.interrupted},
                    {"done", report.done_count},
                    {"failed", report.failed_count}};
    util::write_file(ctx.ws->root() / "run_report.json", run_report.dump(2) + "\n");
  }

  if (ctx.ws->has_artifact("airfoil/selection.json")) {
    json sel = json::parse(ctx.ws->read_for(AgentRole::planner, "airfoil/selection.json"));
    summary.winner_airfoil = sel.at("winner_airfoil").get<std::string>();
    summary.winner_case_id = sel.at("winner_case_id").get<std::string>();
  }
  if (ctx.ws->has_artifact("structural/structural_sweep.csv")) {
    auto results = structures::parse_sweep_csv(
        ctx.ws->read_for(AgentRole::planner, "structural/structural_sweep.csv"));
    summary.sweep_total = results.size();
  }
  if (ctx.ws->has_artifact("optimization/summary.json")) {
    json o = json::parse(ctx.ws->read_for(AgentRole::planner, "optimization/summary.json"));
    summary.best_stress_mpa = o.at("best_stress_mpa").get<double>();
    summary.best_discrete_stress_mpa = o.at("best_discrete_stress_mpa").get<double>();
    summary.improvement_fraction = o.at("improvement_fraction").get<double>();
    summary.pareto_size = o.at("pareto_size").get<std::size_t>();
  }

  if (report.interrupted) {
    summary.status = RunStatus::kInterrupted;
  } else if (report.failed_count > 0) {
    summary.status = RunStatus::kExecutionFailure;
  } else {
    summary.status = RunStatus::kSuccess;
  }
  ctx.ws->log("pipeline finished: " + std::to_string(report.done_count) + " done, " +
              std::to_string(report.failed_count) + " failed");
  return summary;
}

recovery::LogClassifier load_classifier(const PipelineOptions& options) {
  fs::path rules = options.data_dir / "error_patterns.json";
  if (!options.data_dir.empty() && fs::exists(rules))
    return recovery::LogClassifier::from_file(rules);
  // minimal built-in fallback mirroring the bundled table
  return recovery::LogClassifier::from_json(json::parse(R"({"rules":[
    {"kind":"MeshConversionFailure","pattern":"mesh"},
    {"kind":"SolverDivergence","pattern":"diverg|floating point"},
    {"kind":"BoundaryConditionError","pattern":"patch|boundary"},
    {"kind":"ResourceExhaustion","pattern":"memory|space|alloc"}
  ]})"));
}

}  // namespace

RunSummary run(const domain::RequirementSpec& spec, const PipelineOptions& options) {
  RunSummary summary;
  auto violations = domain::validate(spec);
  if (!violations.empty()) {
    summary.status = RunStatus::kValidationFailure;
    return summary;
  }

  auto ws = ProjectWorkspace::init(spec, options.root, options.force_init);
  recovery::CheckpointStore store(options.root / "checkpoints");

  PipelineContext ctx;
  ctx.spec = spec;
  ctx.options = options;
  ctx.ws = &ws;
  ctx.store = &store;
  ctx.classifier = load_classifier(options);
  ctx.sweep_configs = structures::sweep();

  // knowledge support for the planning step
  knowledge::KnowledgeStore kb(options.root / "knowledge");
  if (!options.data_dir.empty()) kb.seed_from(options.data_dir / "knowledge");
  auto hits = kb.query(spec.material.name + " material properties");
  if (!hits.empty()) ws.log("knowledge: using note '" + hits.front().note.id + "' for material data");

  auto backend = planner::make_backend(options.planner_kind, options.planner_url);
  ctx.matrix = backend->generate_matrix(spec, options.seed);
  ws.log("planner (" + backend->kind() + ") generated " + std::to_string(ctx.matrix.cases.size()) +
         " cases");
  ws.publish(AgentRole::planner, "airfoil/simulation_matrix.csv", planner::matrix_csv(ctx.matrix));
  ws.publish(AgentRole::planner, "airfoil/simulation_matrix.json", json(ctx.matrix).dump(2) + "\n");
  ws.publish(AgentRole::planner, "airfoil/aerodynamics_plan.md",
             planner::aerodynamics_plan_md(spec, ctx.matrix));
  ws.publish(AgentRole::planner, "airfoil/acoustics_plan.md", planner::acoustics_plan_md(spec));

  planner::TaskGraph graph = planner::build_task_graph(ctx.matrix, spec, ctx.sweep_configs.size());
  ctx.graph = &graph;
  store.save("plan", 0.0, snapshot_state(ctx, graph, "plan"));

  auto report = execute_graph(ctx, graph);
  return finish(ctx, report);
}

RunSummary resume(const PipelineOptions& options) {
  RunSummary summary;
  recovery::CheckpointStore store(options.root / "checkpoints");
  auto latest = store.restore_latest_valid();
  if (!latest) {
    summary.status = RunStatus::kNoCheckpoint;
    return summary;
  }
  auto ws = ProjectWorkspace::open(options.root);
  const json& state = latest->second;

  PipelineContext ctx;
  ctx.spec = state.at("spec").get<domain::RequirementSpec>();
  ctx.options = options;
  ctx.options.seed = state.at("seed").get<std::uint64_t>();
  ctx.options.planner_kind = state.at("planner").get<std::string>();
  ctx.options.solver = state.at("solver").get<std::string>();
  ctx.matrix = state.at("matrix").get<domain::DesignMatrix>();
  ctx.ws = &ws;
  ctx.store = &store;
  ctx.classifier = load_classifier(options);
  ctx.sweep_configs = structures::sweep();
  ctx.stage_count = state.value("stage_count", std::size_t{0});

  planner::TaskGraph graph = state.at("graph").get<planner::TaskGraph>();
  // anything caught mid-flight reruns from scratch
  for (auto& n : graph.nodes)
    if (n.status == planner::TaskStatus::kRunning || n.status == planner::TaskStatus::kFailed)
      n.status = planner::TaskStatus::kPending;
  ctx.graph = &graph;

  ws.log("resuming from checkpoint " + latest->first.checkpoint_id + " (phase " +
         latest->first.phase + ")");
  auto report = execute_graph(ctx, graph);
  return finish(ctx, report);
}

RunStatus write_report(const fs::path& root, const std::string& /*format*/) {
  auto ws = ProjectWorkspace::open(root);
  PipelineContext ctx;
  ctx.ws = &ws;
  ctx.spec = ws.read_spec();
  if (!ws.has_artifact("airfoil/simulation_matrix.json")) return RunStatus::kExecutionFailure;
  ctx.matrix = json::parse(ws.read_for(AgentRole::planner, "airfoil/simulation_matrix.json"))
                   .get<domain::DesignMatrix>();
  write_multi_case_csvs(ctx);
  write_result_md(ctx);
  return RunStatus::kSuccess;
}

}  // namespace aeroforge::pipeline
