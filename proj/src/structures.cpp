#include "aeroforge/structures.hpp"

#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "aeroforge/util.hpp"

namespace aeroforge::structures {

using util::num_str;

namespace {
constexpr double kGravity = 9.80665;

std::vector<double> levels(double lo, double hi, int n) {
  std::vector<double> out;
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}
}  // namespace

std::vector<domain::StructConfig> sweep(const SweepBounds& b) {
  std::vector<domain::StructConfig> out;
  for (double sw : levels(b.spar_width_min, b.spar_width_max, b.spar_width_levels))
    for (double rt : levels(b.rib_thickness_min, b.rib_thickness_max, b.rib_thickness_levels))
      for (double st : levels(b.shell_thickness_min, b.shell_thickness_max, b.shell_thickness_levels))
        for (int ns : b.n_spars_levels)
          for (int nr : b.n_ribs_levels) out.push_back({sw, rt, st, ns, nr});
  return out;
}

std::string config_id(const domain::StructConfig& c) {
  std::ostringstream ss;
  ss << "sw" << num_str(c.spar_width_mm) << "_rt" << num_str(c.rib_thickness_mm) << "_st"
     << num_str(c.shell_thickness_mm) << "_ns" << c.n_spars << "_nr" << c.n_ribs;
  return ss.str();
}

std::vector<LoadCase> load_cases(const domain::RequirementSpec& spec,
                                 const domain::CaseConfig& selected,
                                 const domain::FlowResult& flow, double air_density) {
  if (!flow.converged) throw std::invalid_argument("load_cases: selected flow result not converged");
  const double area = spec.chord_m * spec.span_m;
  const double lift =
      0.5 * air_density * selected.velocity_ms * selected.velocity_ms * area * flow.cl;
  return {{"cruise", 1.0, lift},
          {"maneuver", 2.5, lift},
          {"gust", 1.5, lift},
          {"landing", 3.0, lift}};
}

double mass_g(const domain::StructConfig& config, const geometry::AirfoilCoordinates& coords,
              double chord_m, double span_m, const domain::MaterialSpec& material) {
  auto props = geometry::wing_section_properties(coords, config, chord_m, span_m);
  return material.density_kg_m3 * props.total_volume_m3 * 1000.0;
}

StressResult desk_stress(const domain::StructConfig& config, const LoadCase& load,
                         const geometry::AirfoilCoordinates& coords, double chord_m, double span_m,
                         const domain::MaterialSpec& material) {
  auto props = geometry::wing_section_properties(coords, config, chord_m, span_m);
  if (props.second_moment_m4 <= 0) throw std::invalid_argument("non-positive section inertia");

  const double wing_mass_kg = material.density_kg_m3 * props.total_volume_m3;
  const double force = load.load_factor * (load.cruise_lift_n + wing_mass_kg * kGravity);

  // uniformly distributed load over a root-fixed cantilever of length = span
  const double moment_root = force * span_m / 2.0;
  double y_max = 0.0;
  for (const auto& p : coords.upper) y_max = std::max(y_max, std::fabs(p.y));
  for (const auto& p : coords.lower) y_max = std::max(y_max, std::fabs(p.y));
  y_max *= chord_m;

  StressResult r;
  r.max_von_mises_mpa = moment_root * y_max / props.second_moment_m4 / 1e6;
  r.tip_displacement_mm =
      force * std::pow(span_m, 3.0) / (8.0 * material.youngs_modulus_pa * props.second_moment_m4) *
      1000.0;
  return r;
}

domain::StructResult evaluate_config(const domain::StructConfig& config,
                                     const std::vector<LoadCase>& loads,
                                     const geometry::AirfoilCoordinates& coords, double chord_m,
                                     double span_m, const domain::MaterialSpec& material) {
  domain::StructResult out;
  out.config = config;
  out.mass_g = mass_g(config, coords, chord_m, span_m, material);
  double worst = 0.0;
  for (const auto& lc : loads) {
    auto r = desk_stress(config, lc, coords, chord_m, span_m, material);
    out.max_von_mises_mpa[lc.name] = r.max_von_mises_mpa;
    out.max_displacement_mm[lc.name] = r.tip_displacement_mm;
    worst = std::max(worst, r.max_von_mises_mpa);
  }
  out.safety_factor = material.yield_strength_pa / 1e6 / worst;
  return out;
}

SweepOutcome run_sweep(const std::vector<domain::StructConfig>& configs,
                       const ConfigEvaluator& evaluator) {
  if (configs.empty()) throw std::invalid_argument("run_sweep: empty configuration list");
  SweepOutcome out;
  out.attempted = configs.size();
  for (const auto& c : configs) {
    try {
      out.results.push_back(evaluator(c));
    } catch (const std::exception&) {
      out.failed_config_ids.push_back(config_id(c));
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<domain::StructResult>& results,
                      const std::vector<LoadCase>& loads) {
  std::ostringstream ss;
  ss << "config_id,spar_width_mm,rib_thickness_mm,shell_thickness_mm,n_spars,n_ribs";
  for (const auto& lc : loads) ss << ",stress_" << lc.name << "_mpa";
  for (const auto& lc : loads) ss << ",displacement_" << lc.name << "_mm";
  ss << ",max_stress_mpa,mass_g,safety_factor\n";
  for (const auto& r : results) {
    ss << config_id(r.config) << "," << num_str(r.config.spar_width_mm) << ","
       << num_str(r.config.rib_thickness_mm) << "," << num_str(r.config.shell_thickness_mm) << ","
       << r.config.n_spars << "," << r.config.n_ribs;
    double worst = 0.0;
    for (const auto& lc : loads) {
      double s = r.max_von_mises_mpa.at(lc.name);
      worst = std::max(worst, s);
      ss << "," << num_str(s);
    }
    for (const auto& lc : loads) ss << "," << num_str(r.max_displacement_mm.at(lc.name));
    ss << "," << num_str(worst) << "," << num_str(r.mass_g) << "," << num_str(r.safety_factor)
       << "\n";
  }
  return ss.str();
}

std::vector<domain::StructResult> parse_sweep_csv(const std::string& content) {
  auto lines = util::split(content, '\n');
  if (lines.empty()) throw std::invalid_argument("empty sweep table");
  auto header = util::split(lines[0], ',');
  std::vector<std::string> stress_cases, disp_cases;
  for (const auto& h : header) {
    if (util::starts_with(h, "stress_") && h.size() > 11)
      stress_cases.push_back(h.substr(7, h.size() - 7 - 4));
    if (util::starts_with(h, "displacement_") && h.size() > 16)
      disp_cases.push_back(h.substr(13, h.size() - 13 - 3));
  }
  std::vector<domain::StructResult> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (util::trim(lines[i]).empty()) continue;
    auto f = util::split(lines[i], ',');
    if (f.size() != header.size()) throw std::invalid_argument("sweep row width mismatch");
    domain::StructResult r;
    std::size_t k = 1;
    r.config.spar_width_mm = util::parse_double(f[k++]);
    r.config.rib_thickness_mm = util::parse_double(f[k++]);
    r.config.shell_thickness_mm = util::parse_double(f[k++]);
    r.config.n_spars = static_cast<int>(util::parse_double(f[k++]));
    r.config.n_ribs = static_cast<int>(util::parse_double(f[k++]));
    for (const auto& name : stress_cases) r.max_von_mises_mpa[name] = util::parse_double(f[k++]);
    for (const auto& name : disp_cases) r.max_displacement_mm[name] = util::parse_double(f[k++]);
    ++k;  // max_stress column is derived
    r.mass_g = util::parse_double(f[k++]);
    r.safety_factor = util::parse_double(f[k++]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_fea_command(const std::string& command_template, const std::string& config_dir) {
  std::string out;
  out.reserve(command_template.size());
  for (std::size_t i = 0; i < command_template.size();) {
    if (command_template[i] == '{') {
      auto close = command_template.find('}', i);
      if (close == std::string::npos) throw std::invalid_argument("unterminated placeholder");
      std::string key = command_template.substr(i + 1, close - i - 1);
      if (key != "config_dir") throw std::invalid_argument("unknown placeholder: {" + key + "}");
      out += config_dir;
      i = close + 1;
    } else {
      out.push_back(command_template[i++]);
    }
  }
  return out;
}

StressResult parse_fea_summary(const std::string& listing) {
  static const std::regex stress_re(R"(max(?:imum)?\s+von\s+mises\s+stress\s*\(mpa\)\s*:\s*([0-9eE+\-.]+))",
                                    std::regex::icase);
  static const std::regex disp_re(R"(max(?:imum)?\s+displacement\s*\(mm\)\s*:\s*([0-9eE+\-.]+))",
                                  std::regex::icase);
  std::smatch m;
  StressResult r;
  if (!std::regex_search(listing, m, stress_re))
    throw std::invalid_argument("solver listing has no von Mises summary line");
  r.max_von_mises_mpa = util::parse_double(m[1].str());
  if (!std::regex_search(listing, m, disp_re))
    throw std::invalid_argument("solver listing has no displacement summary line");
  r.tip_displacement_mm = util::parse_double(m[1].str());
  return r;
}

}  // namespace aeroforge::structures
