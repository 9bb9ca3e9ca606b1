#include "aeroforge/domain.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace aeroforge::domain {

namespace {
void require(std::vector<Violation>& out, bool ok, const std::string& field, const std::string& rule) {
  if (!ok) out.push_back({field, rule});
}
}  // namespace

std::vector<Violation> validate(const MaterialSpec& m) {
  std::vector<Violation> v;
  require(v, m.youngs_modulus_pa > 0, "material.youngs_modulus", "E > 0");
  require(v, m.poisson_ratio > 0 && m.poisson_ratio < 0.5, "material.poisson_ratio", "0 < nu < 0.5");
  require(v, m.density_kg_m3 > 0, "material.density", "rho > 0");
  require(v, m.yield_strength_pa > 0, "material.yield_strength", "yield > 0");
  return v;
}

std::vector<Violation> validate(const RequirementSpec& s) {
  std::vector<Violation> v;
  require(v, s.chord_m > 0, "chord", "chord > 0");
  require(v, s.span_m > 0, "span", "span > 0");
  require(v, !s.velocities_ms.empty(), "velocities", "nonempty");
  for (double u : s.velocities_ms) require(v, u > 0, "velocities", "all > 0");
  require(v, s.aoa_range.min_deg <= s.aoa_range.max_deg, "aoa_range", "min <= max");
  require(v, std::fabs(s.aero_weight + s.noise_weight - 1.0) <= 1e-9, "weights",
          "aero_weight + noise_weight = 1");
  require(v, s.kinematic_viscosity_m2_s > 0, "kinematic_viscosity", "nu > 0");
  for (const auto& m : validate(s.material)) v.push_back(m);
  return v;
}

std::vector<Violation> validate(const CaseConfig& c) {
  std::vector<Violation> v;
  require(v, !c.case_id.empty(), "case_id", "nonempty");
  require(v, c.chord_m > 0, "chord", "chord > 0");
  require(v, c.velocity_ms > 0, "velocity", "U > 0");
  require(v, c.kinematic_viscosity_m2_s > 0, "kinematic_viscosity", "nu > 0");
  if (c.chord_m > 0 && c.velocity_ms > 0 && c.kinematic_viscosity_m2_s > 0) {
    double re = c.velocity_ms * c.chord_m / c.kinematic_viscosity_m2_s;
    require(v, std::fabs(c.reynolds - re) <= 0.005 * re, "reynolds",
            "Re = U*c/nu within 0.5% relative");
  }
  return v;
}

std::vector<Violation> validate(const DesignMatrix& m) {
  std::vector<Violation> v;
  std::set<std::string> ids;
  for (const auto& c : m.cases) {
    for (const auto& cv : validate(c)) v.push_back(cv);
    if (!ids.insert(c.case_id).second)
      v.push_back({"case_id", "unique within matrix: duplicate '" + c.case_id + "'"});
  }
  return v;
}

std::vector<Violation> validate(const FlowResult& r) {
  std::vector<Violation> v;
  require(v, r.cd > 0, "cd", "cd > 0");
  if (r.cd > 0)
    require(v, std::fabs(r.lift_to_drag - r.cl / r.cd) <= 1e-9 * std::max(1.0, std::fabs(r.cl / r.cd)),
            "lift_to_drag", "L/D = cl/cd");
  if (r.theta_m > 0) {
    require(v, std::fabs(r.shape_factor - r.delta_star_m / r.theta_m) <=
                   1e-9 * std::max(1.0, r.shape_factor),
            "shape_factor", "H = delta*/theta");
    require(v, r.shape_factor >= 1.0, "shape_factor", "H >= 1");
  }
  return v;
}

std::vector<Violation> validate(const AcousticResult& r) {
  std::vector<Violation> v;
  for (std::size_t i = 1; i < r.frequencies_hz.size(); ++i)
    require(v, r.frequencies_hz[i] > r.frequencies_hz[i - 1], "frequencies", "strictly increasing");
  double max_band = -1e30;
  for (std::size_t i = 0; i < r.spl_total_db.size(); ++i) {
    max_band = std::max(max_band, r.spl_total_db[i]);
    for (const auto& [name, spl] : r.spl_by_mechanism) {
      if (i < spl.size())
        require(v, r.spl_total_db[i] >= spl[i] - 1e-9, "spl",
                "total >= mechanism '" + name + "' at every frequency");
    }
  }
  if (!r.spl_total_db.empty())
    require(v, r.oaspl_db >= max_band - 1e-9, "oaspl", "oaspl >= max single-band level");
  return v;
}

std::vector<Violation> validate(const StructConfig& c) {
  std::vector<Violation> v;
  require(v, c.spar_width_mm >= 0.2 && c.spar_width_mm <= 2.0, "spar_width", "0.2 <= w <= 2.0 mm");
  require(v, c.rib_thickness_mm >= 0.5 && c.rib_thickness_mm <= 2.0, "rib_thickness",
          "0.5 <= t <= 2.0 mm");
  require(v, c.shell_thickness_mm >= 1.0 && c.shell_thickness_mm <= 3.0, "shell_thickness",
          "1.0 <= t <= 3.0 mm");
  require(v, c.n_spars == 2 || c.n_spars == 3, "n_spars", "n_spars in {2,3}");
  require(v, c.n_ribs == 2 || c.n_ribs == 3, "n_ribs", "n_ribs in {2,3}");
  return v;
}

std::vector<Violation> validate(const StructResult& r, const MaterialSpec& material) {
  std::vector<Violation> v;
  require(v, r.mass_g > 0, "mass", "mass > 0");
  double worst = 0.0;
  for (const auto& [_, s] : r.max_von_mises_mpa) worst = std::max(worst, s);
  if (worst > 0) {
    double sf = material.yield_strength_pa / 1e6 / worst;
    require(v, std::fabs(r.safety_factor - sf) <= 1e-9 * std::max(1.0, sf), "safety_factor",
            "SF = yield / max von Mises");
  }
  return v;
}

std::string describe(const std::vector<Violation>& v) {
  std::ostringstream ss;
  for (const auto& x : v) ss << x.field << ": " << x.rule << "\n";
  return ss.str();
}

// ---- JSON serialization ----

void to_json(json& j, const MaterialSpec& m) {
  j = json{{"name", m.name},
           {"youngs_modulus_pa", m.youngs_modulus_pa},
           {"poisson_ratio", m.poisson_ratio},
           {"density_kg_m3", m.density_kg_m3},
           {"yield_strength_pa", m.yield_strength_pa}};
}

void from_json(const json& j, MaterialSpec& m) {
  j.at("name").get_to(m.name);
  j.at("youngs_modulus_pa").get_to(m.youngs_modulus_pa);
  j.at("poisson_ratio").get_to(m.poisson_ratio);
  j.at("density_kg_m3").get_to(m.density_kg_m3);
  j.at("yield_strength_pa").get_to(m.yield_strength_pa);
}

void to_json(json& j, const RequirementSpec& s) {
  j = json{{"objective_text", s.objective_text},
           {"chord_m", s.chord_m},
           {"span_m", s.span_m},
           {"velocities_ms", s.velocities_ms},
           {"aoa_min_deg", s.aoa_range.min_deg},
           {"aoa_max_deg", s.aoa_range.max_deg},
           {"airfoil_candidates", s.airfoil_candidates},
           {"material", s.material},
           {"min_safety_factor", s.min_safety_factor},
           {"aero_weight", s.aero_weight},
           {"noise_weight", s.noise_weight},
           {"kinematic_viscosity_m2_s", s.kinematic_viscosity_m2_s}};
}

void from_json(const json& j, RequirementSpec& s) {
  j.at("objective_text").get_to(s.objective_text);
  j.at("chord_m").get_to(s.chord_m);
  j.at("span_m").get_to(s.span_m);
  j.at("velocities_ms").get_to(s.velocities_ms);
  j.at("aoa_min_deg").get_to(s.aoa_range.min_deg);
  j.at("aoa_max_deg").get_to(s.aoa_range.max_deg);
  j.at("airfoil_candidates").get_to(s.airfoil_candidates);
  j.at("material").get_to(s.material);
  j.at("min_safety_factor").get_to(s.min_safety_factor);
  j.at("aero_weight").get_to(s.aero_weight);
  j.at("noise_weight").get_to(s.noise_weight);
  s.kinematic_viscosity_m2_s = j.value("kinematic_viscosity_m2_s", kDefaultKinematicViscosity);
}

void to_json(json& j, const CaseConfig& c) {
  j = json{{"case_id", c.case_id},
           {"airfoil", c.airfoil},
           {"chord_m", c.chord_m},
           {"velocity_ms", c.velocity_ms},
           {"aoa_deg", c.aoa_deg},
           {"reynolds", c.reynolds},
           {"kinematic_viscosity_m2_s", c.kinematic_viscosity_m2_s}};
}

void from_json(const json& j, CaseConfig& c) {
  j.at("case_id").get_to(c.case_id);
  j.at("airfoil").get_to(c.airfoil);
  j.at("chord_m").get_to(c.chord_m);
  j.at("velocity_ms").get_to(c.velocity_ms);
  j.at("aoa_deg").get_to(c.aoa_deg);
  j.at("reynolds").get_to(c.reynolds);
  c.kinematic_viscosity_m2_s = j.value("kinematic_viscosity_m2_s", kDefaultKinematicViscosity);
}

void to_json(json& j, const DesignMatrix& m) { j = json{{"cases", m.cases}}; }
void from_json(const json& j, DesignMatrix& m) { j.at("cases").get_to(m.cases); }

void to_json(json& j, const FlowResult& r) {
  j = json{{"cl", r.cl},
           {"cd", r.cd},
           {"cm", r.cm},
           {"lift_to_drag", r.lift_to_drag},
           {"delta_star_m", r.delta_star_m},
           {"theta_m", r.theta_m},
           {"shape_factor", r.shape_factor},
           {"converged", r.converged},
           {"iterations", r.iterations}};
}

void from_json(const json& j, FlowResult& r) {
  j.at("cl").get_to(r.cl);
  j.at("cd").get_to(r.cd);
  j.at("cm").get_to(r.cm);
  j.at("lift_to_drag").get_to(r.lift_to_drag);
  j.at("delta_star_m").get_to(r.delta_star_m);
  j.at("theta_m").get_to(r.theta_m);
  j.at("shape_factor").get_to(r.shape_factor);
  j.at("converged").get_to(r.converged);
  j.at("iterations").get_to(r.iterations);
}

void to_json(json& j, const AcousticResult& r) {
  json bands = json::array();
  for (const auto& b : r.third_octave) bands.push_back({{"center_hz", b.center_hz}, {"level_db", b.level_db}});
  j = json{{"frequencies_hz", r.frequencies_hz},
           {"spl_by_mechanism", r.spl_by_mechanism},
           {"spl_total_db", r.spl_total_db},
           {"oaspl_db", r.oaspl_db},
           {"oaspl_dba", r.oaspl_dba},
           {"oaspl_dbc", r.oaspl_dbc},
           {"third_octave", bands},
           {"observer_distance_m", r.observer_distance_m},
           {"observer_angle_deg", r.observer_angle_deg}};
}

void from_json(const json& j, AcousticResult& r) {
  j.at("frequencies_hz").get_to(r.frequencies_hz);
  j.at("spl_by_mechanism").get_to(r.spl_by_mechanism);
  j.at("spl_total_db").get_to(r.spl_total_db);
  j.at("oaspl_db").get_to(r.oaspl_db);
  j.at("oaspl_dba").get_to(r.oaspl_dba);
  j.at("oaspl_dbc").get_to(r.oaspl_dbc);
  r.third_octave.clear();
  for (const auto& b : j.at("third_octave"))
    r.third_octave.push_back({b.at("center_hz").get<double>(), b.at("level_db").get<double>()});
  j.at("observer_distance_m").get_to(r.observer_distance_m);
  j.at("observer_angle_deg").get_to(r.observer_angle_deg);
}

void to_json(json& j, const StructConfig& c) {
  j = json{{"spar_width_mm", c.spar_width_mm},
           {"rib_thickness_mm", c.rib_thickness_mm},
           {"shell_thickness_mm", c.shell_thickness_mm},
           {"n_spars", c.n_spars},
           {"n_ribs", c.n_ribs}};
}

void from_json(const json& j, StructConfig& c) {
  j.at("spar_width_mm").get_to(c.spar_width_mm);
  j.at("rib_thickness_mm").get_to(c.rib_thickness_mm);
  j.at("shell_thickness_mm").get_to(c.shell_thickness_mm);
  j.at("n_spars").get_to(c.n_spars);
  j.at("n_ribs").get_to(c.n_ribs);
}

void to_json(json& j, const StructResult& r) {
  j = json{{"config", r.config},
           {"max_von_mises_mpa", r.max_von_mises_mpa},
           {"max_displacement_mm", r.max_displacement_mm},
           {"mass_g", r.mass_g},
           {"safety_factor", r.safety_factor}};
}

void from_json(const json& j, StructResult& r) {
  j.at("config").get_to(r.config);
  j.at("max_von_mises_mpa").get_to(r.max_von_mises_mpa);
  j.at("max_displacement_mm").get_to(r.max_displacement_mm);
  j.at("mass_g").get_to(r.mass_g);
  j.at("safety_factor").get_to(r.safety_factor);
}

}  // namespace aeroforge::domain
