#include "aeroforge/aero.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "aeroforge/util.hpp"

namespace aeroforge::aero {

using util::num_str;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
}  // namespace

Vec3 inlet_velocity(double velocity_ms, double aoa_deg) {
  if (velocity_ms < 0) throw std::invalid_argument("inlet_velocity: U must be >= 0");
  double a = aoa_deg * kDegToRad;
  return {velocity_ms * std::cos(a), velocity_ms * std::sin(a), 0.0};
}

double reynolds(double velocity_ms, double chord_m, double kinematic_viscosity_m2_s) {
  if (velocity_ms <= 0 || chord_m <= 0 || kinematic_viscosity_m2_s <= 0)
    throw std::invalid_argument("reynolds: all arguments must be positive");
  return velocity_ms * chord_m / kinematic_viscosity_m2_s;
}

namespace {

/// Thin-airfoil Fourier coefficients of the camber slope over
/// x = (1 - cos(theta))/2. Midpoint quadrature; symmetric sections give
/// exactly zero.
struct CamberFourier {
  double i0 = 0.0;  // (1/pi) * int slope dtheta
  double i1 = 0.0;  // (2/pi) * int slope cos(theta) dtheta
  double i2 = 0.0;  // (2/pi) * int slope cos(2 theta) dtheta
  double zero_lift = 0.0;  // (1/pi) * int slope (1 - cos theta) dtheta
};

CamberFourier camber_fourier(const geometry::AirfoilSpec& airfoil) {
  CamberFourier f;
  if (airfoil.max_camber == 0.0) return f;
  const int n = 4096;
  for (int i = 0; i < n; ++i) {
    double th = kPi * (i + 0.5) / n;
    double x = 0.5 * (1.0 - std::cos(th));
    double slope = geometry::camber(x, airfoil.max_camber, airfoil.camber_position).slope;
    f.i0 += slope;
    f.i1 += slope * std::cos(th);
    f.i2 += slope * std::cos(2.0 * th);
    f.zero_lift += slope * (1.0 - std::cos(th));
  }
  double w = kPi / n;
  f.i0 *= w / kPi;
  f.i1 *= 2.0 * w / kPi;
  f.i2 *= 2.0 * w / kPi;
  f.zero_lift *= w / kPi;
  return f;
}

}  // namespace

double zero_lift_angle(const geometry::AirfoilSpec& airfoil) {
  return camber_fourier(airfoil).zero_lift;
}

domain::FlowResult run_desk_solver(const domain::CaseConfig& config,
                                   const geometry::AirfoilSpec& airfoil,
                                   const DeskSolverConfig& desk) {
  const double alpha = config.aoa_deg * kDegToRad;
  const auto f = camber_fourier(airfoil);

  const double a0 = alpha - f.i0;
  domain::FlowResult r;
  r.cl = kPi * (2.0 * a0 + f.i1);
  r.cm = 0.25 * kPi * (f.i2 - f.i1);

  const double re = config.reynolds;
  const double cf = desk.skin_friction_coeff * std::pow(re, desk.skin_friction_exponent);
  const double t = airfoil.thickness;
  const double ff = 1.0 + desk.form_factor_linear * t +
                    desk.form_factor_quartic * t * t * t * t;
  r.cd = 2.0 * cf * ff + desk.lift_dependent_drag_k * r.cl * r.cl;
  r.lift_to_drag = r.cl / r.cd;

  const double scale = std::pow(re, desk.skin_friction_exponent);
  r.delta_star_m = desk.flat_plate_delta_star * scale * config.chord_m;
  r.theta_m = desk.flat_plate_theta * scale * config.chord_m;
  r.shape_factor = r.delta_star_m / r.theta_m;
  r.converged = true;
  r.iterations = desk.iteration_budget;
  return r;
}

std::string render_command(const std::string& templ,
                           const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(templ.size());
  for (std::size_t i = 0; i < templ.size();) {
    if (templ[i] == '{') {
      auto close = templ.find('}', i);
      if (close == std::string::npos) throw std::invalid_argument("unterminated placeholder");
      std::string key = templ.substr(i + 1, close - i - 1);
      auto it = vars.find(key);
      if (it == vars.end()) throw std::invalid_argument("unknown placeholder: {" + key + "}");
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(templ[i++]);
    }
  }
  return out;
}

namespace {

std::string foam_dict(const std::string& object, const std::string& body) {
  std::ostringstream ss;
  ss << "FoamFile\n{\n    version     2.0;\n    format      ascii;\n    class       dictionary;\n"
     << "    object      " << object << ";\n}\n\n"
     << body;
  return ss.str();
}

void publish(workspace::ProjectWorkspace& ws, const std::string& rel, const std::string& content) {
  ws.publish(workspace::AgentRole::aero, rel, content, /*overwrite=*/true);
}

}  // namespace

void build_case(workspace::ProjectWorkspace& ws, const domain::CaseConfig& config,
                const geometry::AirfoilCoordinates& coords, const CaseBuildOptions& opts) {
  const std::string d = workspace::ProjectWorkspace::case_dir_name(config);
  const Vec3 inlet = inlet_velocity(config.velocity_ms, config.aoa_deg);

  publish(ws, d + "/airfoil.geo", geometry::to_geo(coords, config.chord_m));
  publish(ws, d + "/airfoil_coordinates.csv", geometry::to_csv(coords));
  publish(ws, d + "/airfoil.dat", geometry::to_selig(coords));

  {
    std::ostringstream ss;
    ss << "# Mesh request: " << config.case_id << "\n\n"
       << "- topology: structured C-type\n"
       << "- node target: " << opts.mesh_nodes_min << "-" << opts.mesh_nodes_max << "\n"
       << "- chord: " << num_str(config.chord_m) << " m\n"
       << "- quality gate: solver-reported checks recorded, no numeric pass bar defined\n";
    publish(ws, d + "/mesh.md", ss.str());
  }

  publish(ws, d + "/0/U",
          foam_dict("U", "dimensions      [0 1 -1 0 0 0 0];\n\ninternalField   uniform (" +
                             num_str(inlet.x) + " " + num_str(inlet.y) + " " + num_str(inlet.z) +
                             ");\n\nboundaryField\n{\n    inlet\n    {\n        type            "
                             "fixedValue;\n        value           uniform (" +
                             num_str(inlet.x) + " " + num_str(inlet.y) + " " + num_str(inlet.z) +
                             ");\n    }\n    outlet\n    {\n        type            zeroGradient;\n"
                             "    }\n    walls\n    {\n        type            noSlip;\n    }\n"
                             "    frontAndBack\n    {\n        type            empty;\n    }\n}\n"));
  publish(ws, d + "/0/p",
          foam_dict("p",
                    "dimensions      [0 2 -2 0 0 0 0];\n\ninternalField   uniform 0;\n\n"
                    "boundaryField\n{\n    inlet\n    {\n        type            zeroGradient;\n"
                    "    }\n    outlet\n    {\n        type            fixedValue;\n"
                    "        value           uniform 0;\n    }\n    walls\n    {\n"
                    "        type            zeroGradient;\n    }\n    frontAndBack\n    {\n"
                    "        type            empty;\n    }\n}\n"));

  publish(ws, d + "/constant/transportProperties",
          foam_dict("transportProperties", "transportModel  Newtonian;\n\nnu              nu [0 2 -1 0 0 0 0] " +
                                               num_str(config.kinematic_viscosity_m2_s) + ";\n"));
  publish(ws, d + "/constant/turbulenceProperties",
          foam_dict("turbulenceProperties",
                    "simulationType  RAS;\n\nRAS\n{\n    RASModel        " + opts.turbulence_model +
                        ";\n    turbulence      on;\n    printCoeffs     on;\n}\n"));

  publish(ws, d + "/system/controlDict",
          foam_dict("controlDict",
                    "application     " + opts.solver + ";\n\nstartFrom       startTime;\nstartTime       0;\n"
                    "stopAt          endTime;\nendTime         " + std::to_string(opts.iterations) +
                    ";\ndeltaT          1;\nwriteControl    timeStep;\nwriteInterval   50;\n\n"
                    "functions\n{\n    forceCoeffs\n    {\n        type            forceCoeffs;\n"
                    "        libs            (forces);\n        patches         (walls);\n"
                    "        magUInf         " + num_str(config.velocity_ms) +
                    ";\n        lRef            " + num_str(config.chord_m) +
                    ";\n        Aref            " + num_str(config.chord_m) +
                    ";\n        liftDir         (" + num_str(-std::sin(config.aoa_deg * kDegToRad)) + " " +
                    num_str(std::cos(config.aoa_deg * kDegToRad)) +
                    " 0);\n        dragDir         (" + num_str(std::cos(config.aoa_deg * kDegToRad)) + " " +
                    num_str(std::sin(config.aoa_deg * kDegToRad)) +
                    " 0);\n        CofR            (" + num_str(0.25 * config.chord_m) +
                    " 0 0);\n        pitchAxis       (0 0 1);\n    }\n}\n"));
  publish(ws, d + "/system/fvSolution",
          foam_dict("fvSolution",
                    "solvers\n{\n    p\n    {\n        solver          GAMG;\n        tolerance       1e-06;\n"
                    "        relTol          0.1;\n        smoother        GaussSeidel;\n    }\n\n"
                    "    U\n    {\n        solver          smoothSolver;\n        smoother        symGaussSeidel;\n"
                    "        tolerance       1e-08;\n        relTol          0.1;\n    }\n}\n\n"
                    "SIMPLE\n{\n    nNonOrthogonalCorrectors 0;\n    consistent      no;\n}\n\n"
                    "relaxationFactors\n{\n    fields\n    {\n        p               " +
                        num_str(opts.relaxation_pressure) +
                        ";\n    }\n    equations\n    {\n        U               " +
                        num_str(opts.relaxation_velocity) + ";\n    }\n}\n"));
  publish(ws, d + "/system/fvSchemes",
          foam_dict("fvSchemes",
                    "ddtSchemes\n{\n    default         steadyState;\n}\n\ngradSchemes\n{\n"
                    "    default         Gauss linear;\n}\n\ndivSchemes\n{\n    default         none;\n"
                    "    div(phi,U)      bounded Gauss linearUpwind grad(U);\n"
                    "    div(phi,nuTilda) bounded Gauss linearUpwind grad(nuTilda);\n"
                    "    div((nuEff*dev2(T(grad(U))))) Gauss linear;\n}\n\nlaplacianSchemes\n{\n"
                    "    default         Gauss linear corrected;\n}\n\ninterpolationSchemes\n{\n"
                    "    default         linear;\n}\n\nsnGradSchemes\n{\n    default         corrected;\n}\n"));

  std::string cmd = render_command(opts.command_template, {{"case_dir", d},
                                                           {"solver", opts.solver},
                                                           {"iterations", std::to_string(opts.iterations)}});
  publish(ws, d + "/Allrun", "#!/bin/sh\n# generated case runner\n" + cmd + "\n");
}

namespace {

/// Synthetic convergence history toward the final coefficients: geometric
/// approach, one row every 300 iterations.
std::string coefficient_table(const domain::FlowResult& r, int iterations) {
  std::ostringstream ss;
  ss << "# Force coefficients\n";
  ss << "# liftDir etc. configured in controlDict\n";
  ss << "# Time        Cm            Cd            Cl            Cl(f)         Cl(r)\n";
  int step = iterations / 10;
  for (int i = 1; i <= 10; ++i) {
    int it = i * step;
    double w = 1.0 - std::pow(0.5, i);  // approaches 1
    double cm = r.cm * w, cd = r.cd * (2.0 - w), cl = r.cl * w;
    if (i == 10) {
      cm = r.cm;
      cd = r.cd;
      cl = r.cl;
    }
    ss << it << "\t" << num_str(cm) << "\t" << num_str(cd) << "\t" << num_str(cl) << "\t"
       << num_str(cl / 2.0) << "\t" << num_str(cl / 2.0) << "\n";
  }
  return ss.str();
}

}  // namespace

domain::FlowResult run_desk_case(workspace::ProjectWorkspace& ws, const domain::CaseConfig& config,
                                 const geometry::AirfoilSpec& airfoil,
                                 const geometry::AirfoilCoordinates& coords, double span_m,
                                 const DeskSolverConfig& desk, const CaseBuildOptions& opts) {
  const std::string d = workspace::ProjectWorkspace::case_dir_name(config);
  domain::FlowResult r = run_desk_solver(config, airfoil, desk);

  publish(ws, d + "/postProcessing/forceCoeffs/0/coefficient.dat",
          coefficient_table(r, opts.iterations));

  nlohmann::json flow{{"case_id", config.case_id},
                      {"velocity_ms", config.velocity_ms},
                      {"aoa_deg", config.aoa_deg},
                      {"reynolds", config.reynolds},
                      {"cl", r.cl},
                      {"cd", r.cd},
                      {"cm", r.cm}};
  publish(ws, d + "/acoustics_data/flow_field.json", flow.dump(2) + "\n");

  nlohmann::json bl{{"delta_star_m", r.delta_star_m},
                    {"theta_m", r.theta_m},
                    {"shape_factor", r.shape_factor},
                    {"source", "desk flat-plate correlation"}};
  publish(ws, d + "/acoustics_data/boundary_layer.json", bl.dump(2) + "\n");

  nlohmann::json bpm{{"chord_m", config.chord_m},
                     {"span_m", span_m},
                     {"velocity_ms", config.velocity_ms},
                     {"aoa_deg", config.aoa_deg},
                     {"reynolds", config.reynolds},
                     {"delta_star_base_m", r.delta_star_m},
                     {"theta_base_m", r.theta_m},
                     {"observer_distance_m", 1.0},
                     {"observer_theta_deg", 90.0},
                     {"observer_phi_deg", 90.0}};
  publish(ws, d + "/acoustics_data/bpm_input.json", bpm.dump(2) + "\n");

  // thin-airfoil loading distribution
  {
    const auto f = camber_fourier(airfoil);
    const double a0 = config.aoa_deg * kDegToRad - f.i0;
    std::ostringstream ss;
    ss << "x,delta_cp\n";
    const int n = 64;
    for (int i = 1; i < n; ++i) {
      double th = kPi * i / n;
      double x = 0.5 * (1.0 - std::cos(th));
      double dcp = 4.0 * (a0 * (1.0 + std::cos(th)) / std::sin(th) + f.i1 * std::sin(th) +
                          f.i2 * std::sin(2.0 * th));
      ss << num_str(x) << "," << num_str(dcp) << "\n";
    }
    publish(ws, d + "/postProcessing/integrated/cp_data.csv", ss.str());
  }

  // surface snapshot for the VTK series
  {
    std::vector<double> xs, ys, zs, vals;
    for (const auto& p : coords.upper) {
      xs.push_back(p.x * config.chord_m);
      ys.push_back(p.y * config.chord_m);
      zs.push_back(0.0);
      vals.push_back(p.y * config.chord_m);
    }
    for (const auto& p : coords.lower) {
      xs.push_back(p.x * config.chord_m);
      ys.push_back(p.y * config.chord_m);
      zs.push_back(0.0);
      vals.push_back(p.y * config.chord_m);
    }
    publish(ws, d + "/VTK/airfoil_surface.vtk",
            workspace::vtk_point_snapshot("airfoil surface " + config.case_id, xs, ys, zs,
                                          "height", vals));
  }
  return r;
}

CoefficientRow parse_coefficient_table(const std::string& content) {
  CoefficientRow row;
  bool found = false;
  for (const auto& line : util::split(content, '\n')) {
    auto t = util::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : t) {
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!cur.empty()) fields.push_back(std::exchange(cur, ""));
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) fields.push_back(cur);
    if (fields.size() < 4) continue;
    CoefficientRow r;
    try {
      // from_chars-based parsing accepts nan/inf tokens emitted by solvers
      r.time = util::parse_double(fields[0]);
      r.cm = util::parse_double(fields[1]);
      r.cd = util::parse_double(fields[2]);
      r.cl = util::parse_double(fields[3]);
    } catch (const std::exception&) {
      continue;
    }
    row = r;
    found = true;
  }
  if (!found) throw MissingOutputError("coefficient table empty or malformed");
  if (!std::isfinite(row.cl) || !std::isfinite(row.cd) || !std::isfinite(row.cm))
    throw SolverDivergenceError("non-finite coefficients in final row");
  return row;
}

domain::FlowResult extract_results(workspace::ProjectWorkspace& ws,
                                   const domain::CaseConfig& config) {
  const std::string d = workspace::ProjectWorkspace::case_dir_name(config);
  const std::string coeff_path = d + "/postProcessing/forceCoeffs/0/coefficient.dat";
  if (!ws.has_artifact(coeff_path)) throw MissingOutputError("missing solver output: " + coeff_path);
  CoefficientRow row = parse_coefficient_table(
      ws.read_for(workspace::AgentRole::aero, coeff_path));

  domain::FlowResult r;
  r.cl = row.cl;
  r.cd = row.cd;
  r.cm = row.cm;
  if (r.cd <= 0) throw SolverDivergenceError("non-physical drag in final row");
  r.lift_to_drag = r.cl / r.cd;
  r.iterations = static_cast<int>(row.time);
  r.converged = true;

  const std::string bl_path = d + "/acoustics_data/boundary_layer.json";
  if (ws.has_artifact(bl_path)) {
    auto bl = nlohmann::json::parse(ws.read_for(workspace::AgentRole::aero, bl_path));
    r.delta_star_m = bl.value("delta_star_m", 0.0);
    r.theta_m = bl.value("theta_m", 0.0);
    r.shape_factor = r.theta_m > 0 ? r.delta_star_m / r.theta_m : 0.0;
  }

  {
    std::ostringstream ss;
    ss << "case_id,airfoil,velocity_ms,aoa_deg,reynolds,cl,cd,cm,lift_to_drag,iterations,converged\n";
    ss << config.case_id << "," << config.airfoil << "," << num_str(config.velocity_ms) << ","
       << num_str(config.aoa_deg) << "," << num_str(config.reynolds) << "," << num_str(r.cl) << ","
       << num_str(r.cd) << "," << num_str(r.cm) << "," << num_str(r.lift_to_drag) << ","
       << r.iterations << "," << (r.converged ? "true" : "false") << "\n";
    ws.publish(workspace::AgentRole::aero, d + "/postProcessing/integrated/force_coefficients.csv",
               ss.str(), true);
  }
  {
    std::ostringstream ss;
    ss << "case_id,delta_star_m,theta_m,shape_factor\n";
    ss << config.case_id << "," << num_str(r.delta_star_m) << "," << num_str(r.theta_m) << ","
       << num_str(r.shape_factor) << "\n";
    ws.publish(workspace::AgentRole::aero, d + "/postProcessing/integrated/boundary_layer.csv",
               ss.str(), true);
  }
  return r;
}

}  // namespace aeroforge::aero
