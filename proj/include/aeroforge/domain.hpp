#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aeroforge::domain {

using json = nlohmann::json;

/// Default kinematic viscosity [m^2/s]. The project's reference operating
/// points imply this value rather than standard-atmosphere air; it is
/// configuration, not physics.
inline constexpr double kDefaultKinematicViscosity = 8.57e-6;

struct MaterialSpec {
  std::string name;
  double youngs_modulus_pa = 0.0;
  double poisson_ratio = 0.0;
  double density_kg_m3 = 0.0;
  double yield_strength_pa = 0.0;
};

struct AoaRange {
  double min_deg = 0.0;
  double max_deg = 0.0;
};

/// Parsed customer requirement: objectives, constraints and bounds that drive
/// planning. Angles in degrees, lengths in metres, SI throughout.
struct RequirementSpec {
  std::string objective_text;
  double chord_m = 0.0;
  double span_m = 0.0;
  std::vector<double> velocities_ms;
  AoaRange aoa_range;
  std::vector<std::string> airfoil_candidates;  // NACA 4-digit designators
  MaterialSpec material;
  double min_safety_factor = 0.0;
  double aero_weight = 0.0;
  double noise_weight = 0.0;
  double kinematic_viscosity_m2_s = kDefaultKinematicViscosity;
};

/// A named invariant violation. Violations are data, not failures.
struct Violation {
  std::string field;
  std::string rule;
};

struct CaseConfig {
  std::string case_id;
  std::string airfoil;
  double chord_m = 0.0;
  double velocity_ms = 0.0;
  double aoa_deg = 0.0;
  double reynolds = 0.0;
  double kinematic_viscosity_m2_s = kDefaultKinematicViscosity;
};

struct DesignMatrix {
  std::vector<CaseConfig> cases;
};

struct FlowResult {
  double cl = 0.0;
  double cd = 0.0;
  double cm = 0.0;
  double lift_to_drag = 0.0;
  double delta_star_m = 0.0;  // displacement thickness
  double theta_m = 0.0;       // momentum thickness
  double shape_factor = 0.0;  // H = delta*/theta
  bool converged = false;
  int iterations = 0;
};

struct ThirdOctaveBand {
  double center_hz = 0.0;
  double level_db = 0.0;
};

struct AcousticResult {
  std::vector<double> frequencies_hz;
  std::map<std::string, std::vector<double>> spl_by_mechanism;
  std::vector<double> spl_total_db;
  double oaspl_db = 0.0;
  double oaspl_dba = 0.0;
  double oaspl_dbc = 0.0;
  std::vector<ThirdOctaveBand> third_octave;
  double observer_distance_m = 0.0;
  double observer_angle_deg = 0.0;
};

struct StructConfig {
  double spar_width_mm = 0.0;
  double rib_thickness_mm = 0.0;
  double shell_thickness_mm = 0.0;
  int n_spars = 0;
  int n_ribs = 0;
};

struct StructResult {
  StructConfig config;
  std::map<std::string, double> max_von_mises_mpa;    // per load case
  std::map<std::string, double> max_displacement_mm;  // per load case
  double mass_g = 0.0;
  double safety_factor = 0.0;
};

std::vector<Violation> validate(const MaterialSpec& m);
std::vector<Violation> validate(const RequirementSpec& spec);
std::vector<Violation> validate(const CaseConfig& c);
std::vector<Violation> validate(const DesignMatrix& m);
std::vector<Violation> validate(const FlowResult& r);
std::vector<Violation> validate(const AcousticResult& r);
std::vector<Violation> validate(const StructConfig& c);
std::vector<Violation> validate(const StructResult& r, const MaterialSpec& material);

std::string describe(const std::vector<Violation>& v);

void to_json(json& j, const MaterialSpec& m);
void from_json(const json& j, MaterialSpec& m);
void to_json(json& j, const RequirementSpec& s);
void from_json(const json& j, RequirementSpec& s);
void to_json(json& j, const CaseConfig& c);
void from_json(const json& j, CaseConfig& c);
void to_json(json& j, const DesignMatrix& m);
void from_json(const json& j, DesignMatrix& m);
void to_json(json& j, const FlowResult& r);
void from_json(const json& j, FlowResult& r);
void to_json(json& j, const AcousticResult& r);
void from_json(const json& j, AcousticResult& r);
void to_json(json& j, const StructConfig& c);
void from_json(const json& j, StructConfig& c);
void to_json(json& j, const StructResult& r);
void from_json(const json& j, StructResult& r);

}  // namespace aeroforge::domain
