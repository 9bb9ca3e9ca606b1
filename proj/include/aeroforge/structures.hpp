#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aeroforge/domain.hpp"
#include "aeroforge/geometry.hpp"

namespace aeroforge::structures {

struct SweepBounds {
  double spar_width_min = 0.2, spar_width_max = 2.0;       // mm
  double rib_thickness_min = 0.5, rib_thickness_max = 2.0; // mm
  double shell_thickness_min = 1.0, shell_thickness_max = 3.0;  // mm
  int spar_width_levels = 3;
  int rib_thickness_levels = 6;
  int shell_thickness_levels = 6;
  std::vector<int> n_spars_levels = {2, 3};
  std::vector<int> n_ribs_levels = {2, 3};
};

/// Full-factorial enumeration, evenly spaced levels including endpoints,
/// deterministic order. Default bounds give 3*6*6*2*2 = 432 configurations.
std::vector<domain::StructConfig> sweep(const SweepBounds& bounds = {});

/// Stable identifier for a configuration (used for directories and rows).
std::string config_id(const domain::StructConfig& c);

struct LoadCase {
  std::string name;
  double load_factor = 1.0;      // multiple of 1g
  double cruise_lift_n = 0.0;    // aerodynamic lift at the cruise point
};

/// Cruise 1g, maneuver 2.5g, gust 1.5g, landing 3g. The cruise lift comes
/// from the selected case: L = 1/2 rho U^2 S Cl. Each case scales both the
/// aerodynamic and the wing-inertia share by its load factor.
std::vector<LoadCase> load_cases(const domain::RequirementSpec& spec,
                                 const domain::CaseConfig& selected,
                                 const domain::FlowResult& flow, double air_density = 1.225);

/// Exact structural mass in grams from the idealized thin-walled section.
double mass_g(const domain::StructConfig& config, const geometry::AirfoilCoordinates& coords,
              double chord_m, double span_m, const domain::MaterialSpec& material);

struct StressResult {
  double max_von_mises_mpa = 0.0;
  double tip_displacement_mm = 0.0;
};

/// Root-fixed cantilever under a uniformly distributed semi-span load:
/// sigma = M y_max / I with the thin-walled section inertia, tip deflection
/// from the cantilever formula. Deterministic; linear in the applied load.
StressResult desk_stress(const domain::StructConfig& config, const LoadCase& load,
                         const geometry::AirfoilCoordinates& coords, double chord_m, double span_m,
                         const domain::MaterialSpec& material);

/// Evaluates one configuration under every load case.
domain::StructResult evaluate_config(const domain::StructConfig& config,
                                     const std::vector<LoadCase>& loads,
                                     const geometry::AirfoilCoordinates& coords, double chord_m,
                                     double span_m, const domain::MaterialSpec& material);

struct SweepOutcome {
  std::vector<domain::StructResult> results;
  std::vector<std::string> failed_config_ids;
  std::size_t attempted = 0;
};

using ConfigEvaluator = std::function<domain::StructResult(const domain::StructConfig&)>;

/// Runs the evaluator over every configuration, aggregating per-config
/// failures without aborting the sweep. Throws on an empty configuration list.
SweepOutcome run_sweep(const std::vector<domain::StructConfig>& configs,
                       const ConfigEvaluator& evaluator);

/// CSV table: one row per configuration with stresses per load case and mass.
std::string sweep_csv(const std::vector<domain::StructResult>& results,
                      const std::vector<LoadCase>& loads);

/// Parses the CSV back (used by the optimization stage).
std::vector<domain::StructResult> parse_sweep_csv(const std::string& content);

/// External FEA adapter surface: renders the solver invocation and parses a
/// stress/displacement summary from a solver output listing.
std::string render_fea_command(const std::string& command_template, const std::string& config_dir);
StressResult parse_fea_summary(const std::string& listing);

}  // namespace aeroforge::structures
