#pragma once

#include <map>
#include <string>

#include "aeroforge/domain.hpp"
#include "aeroforge/geometry.hpp"
#include "aeroforge/workspace.hpp"

namespace aeroforge::aero {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Velocity inlet components (U cos a, U sin a, 0) for angle of attack a.
Vec3 inlet_velocity(double velocity_ms, double aoa_deg);

double reynolds(double velocity_ms, double chord_m, double kinematic_viscosity_m2_s);

struct MissingOutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverDivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic analytic stand-in for the external CFD chain: thin-airfoil
/// lift and moment, flat-plate friction drag with a thickness form factor,
/// and flat-plate boundary-layer correlations. Constants are configuration;
/// the model provides ordering realism, not CFD fidelity.
struct DeskSolverConfig {
  double skin_friction_coeff = 0.074;  // Cf = coeff * Re^exponent, turbulent flat plate
  double skin_friction_exponent = -0.2;
  double form_factor_linear = 2.0;   // FF = 1 + linear*t + quartic*t^4
  double form_factor_quartic = 60.0;
  double lift_dependent_drag_k = 0.01;  // Cd += k * Cl^2
  double flat_plate_delta_star = 0.046;  // delta*/c = coeff * Re^exponent
  double flat_plate_theta = 0.036;       // theta/c  = coeff * Re^exponent
  int iteration_budget = 3000;
};

domain::FlowResult run_desk_solver(const domain::CaseConfig& config,
                                   const geometry::AirfoilSpec& airfoil,
                                   const DeskSolverConfig& desk = {});

/// Thin-airfoil zero-lift angle [rad] for a camber line.
double zero_lift_angle(const geometry::AirfoilSpec& airfoil);

/// Solver-case configuration written into the case tree.
struct CaseBuildOptions {
  std::string solver = "simpleFoam";
  std::string turbulence_model = "SpalartAllmaras";
  double relaxation_pressure = 0.3;
  double relaxation_velocity = 0.7;
  int iterations = 3000;
  int mesh_nodes_min = 40000;
  int mesh_nodes_max = 45000;
  std::string command_template =
      "docker run --rm -v {case_dir}:/case openfoam/openfoam-default "
      "bash -lc 'cd /case && {solver} > log.{solver} 2>&1'";
};

/// Substitutes {name} placeholders; unknown placeholders are an error.
std::string render_command(const std::string& templ,
                           const std::map<std::string, std::string>& vars);

/// Writes the solver configuration documents (0/, constant/, system/, Allrun,
/// mesh.md) plus the geometry description into the case directory. Byte-stable
/// for identical inputs; rebuilding over an existing case republishes the same
/// bytes.
void build_case(workspace::ProjectWorkspace& ws, const domain::CaseConfig& config,
                const geometry::AirfoilCoordinates& coords, const CaseBuildOptions& opts = {});

/// Runs the desk solver and writes its outputs into the case tree: the
/// coefficient iteration table, boundary-layer and BPM input documents, the
/// loading distribution, and a VTK surface snapshot.
domain::FlowResult run_desk_case(workspace::ProjectWorkspace& ws, const domain::CaseConfig& config,
                                 const geometry::AirfoilSpec& airfoil,
                                 const geometry::AirfoilCoordinates& coords, double span_m,
                                 const DeskSolverConfig& desk = {},
                                 const CaseBuildOptions& opts = {});

/// Parses the last iteration row of the coefficient table, derives L/D, and
/// writes integrated/force_coefficients.csv and boundary_layer.csv.
/// Throws MissingOutputError / SolverDivergenceError for the recovery path.
domain::FlowResult extract_results(workspace::ProjectWorkspace& ws,
                                   const domain::CaseConfig& config);

/// Parses an OpenFOAM-style force-coefficient table (whitespace separated,
/// '#' comments, columns Time Cm Cd Cl ...), returning the final row.
struct CoefficientRow {
  double time = 0.0, cm = 0.0, cd = 0.0, cl = 0.0;
};
CoefficientRow parse_coefficient_table(const std::string& content);

}  // namespace aeroforge::aero
