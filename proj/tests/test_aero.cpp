#include <doctest.h>

#include <cmath>

#include "aeroforge/aero.hpp"
#include "aeroforge/recovery.hpp"
#include "aeroforge/util.hpp"
#include "test_helpers.hpp"

using namespace aeroforge;
using workspace::AgentRole;
using workspace::ProjectWorkspace;

namespace {

domain::CaseConfig make_case(const std::string& airfoil, double u, double aoa) {
  domain::CaseConfig c;
  c.airfoil = airfoil;
  c.chord_m = 0.1;
  c.velocity_ms = u;
  c.aoa_deg = aoa;
  c.kinematic_viscosity_m2_s = 8.57e-6;
  c.reynolds = aero::reynolds(u, 0.1, 8.57e-6);
  c.case_id = ProjectWorkspace::case_dir_name(c);
  return c;
}

}  // namespace

TEST_CASE("inlet velocity components") {
  auto v = aero::inlet_velocity(25.0, 0.0);
  CHECK(v.x == 25.0);
  CHECK(v.y == 0.0);
  CHECK(v.z == 0.0);

  auto w = aero::inlet_velocity(30.0, 3.0);
  CHECK(w.x == doctest::Approx(30.0 * std::cos(3.0 * M_PI / 180.0)).epsilon(1e-12));
  CHECK(w.y == doctest::Approx(30.0 * std::sin(3.0 * M_PI / 180.0)).epsilon(1e-12));
  CHECK(w.x == doctest::Approx(29.9589).epsilon(1e-4));
  CHECK(w.y == doctest::Approx(1.5701).epsilon(1e-3));

  SUBCASE("norm preserved for any angle") {
    for (double a : {-6.0, -1.5, 0.0, 2.0, 4.5, 6.0, 45.0}) {
      auto u = aero::inlet_velocity(31.7, a);
      CHECK(std::sqrt(u.x * u.x + u.y * u.y + u.z * u.z) == doctest::Approx(31.7).epsilon(1e-12));
    }
  }
  CHECK_THROWS(aero::inlet_velocity(-1.0, 0.0));
}

TEST_CASE("reynolds number matches the reference matrix") {
  CHECK(aero::reynolds(25.0, 0.1, 8.59e-6) == doctest::Approx(2.91e5).epsilon(2e-3));
  CHECK(aero::reynolds(35.0, 0.1, 8.57e-6) == doctest::Approx(4.08e5).epsilon(2e-3));
  CHECK(aero::reynolds(30.0, 0.1, 8.57e-6) == doctest::Approx(3.50e5).epsilon(2e-3));
  CHECK_THROWS(aero::reynolds(0.0, 0.1, 8.57e-6));
}

TEST_CASE("desk solver physics") {
  auto n0012 = geometry::parse_designator("NACA0012");
  auto n4412 = geometry::parse_designator("NACA4412");

  SUBCASE("symmetric section at zero incidence") {
    auto r = aero::run_desk_solver(make_case("NACA0012", 25, 0), n0012);
    CHECK(r.cl == 0.0);
    CHECK(std::fabs(r.cm) < 1e-12);
    CHECK(r.cd > 0.0);
    CHECK(r.converged);
  }

  SUBCASE("lift is monotonically increasing in incidence for all four sections") {
    for (const char* name : {"NACA0012", "NACA0015", "NACA2412", "NACA4412"}) {
      auto af = geometry::parse_designator(name);
      double prev = -1e9;
      for (double a = 0.0; a <= 6.0; a += 0.5) {
        auto r = aero::run_desk_solver(make_case(name, 30, a), af);
        CHECK(r.cl > prev);
        prev = r.cl;
      }
    }
  }

  SUBCASE("cambered sections pitch nose-down at every tested incidence") {
    for (double a = 0.0; a <= 6.0; a += 1.0) {
      CHECK(aero::run_desk_solver(make_case("NACA4412", 30, a), n4412).cm < 0.0);
      CHECK(aero::run_desk_solver(make_case("NACA2412", 30, a),
                                  geometry::parse_designator("NACA2412"))
                .cm < 0.0);
    }
  }

  SUBCASE("symmetric section: negating incidence negates lift exactly") {
    for (double a : {1.0, 3.0, 6.0}) {
      auto pos = aero::run_desk_solver(make_case("NACA0012", 30, a), n0012);
      auto neg = aero::run_desk_solver(make_case("NACA0012", 30, -a), n0012);
      CHECK(pos.cl == -neg.cl);
    }
  }

  SUBCASE("derived fields are consistent") {
    auto r = aero::run_desk_solver(make_case("NACA4412", 35, 4), n4412);
    CHECK(r.lift_to_drag == r.cl / r.cd);
    CHECK(r.shape_factor == r.delta_star_m / r.theta_m);
    CHECK(r.shape_factor > 1.0);
    CHECK(domain::validate(r).empty());
  }

  SUBCASE("cambered section lifts at zero incidence") {
    auto r = aero::run_desk_solver(make_case("NACA4412", 25, 0), n4412);
    CHECK(r.cl > 0.3);  // thin-airfoil zero-lift angle near -4 deg
    CHECK(aero::zero_lift_angle(n4412) < -0.05);
    CHECK(aero::zero_lift_angle(n0012) == 0.0);
  }
}

TEST_CASE("command template rendering") {
  CHECK(aero::render_command("run {solver} in {case_dir}",
                             {{"solver", "simpleFoam"}, {"case_dir", "sim_a"}}) ==
        "run simpleFoam in sim_a");
  CHECK_THROWS(aero::render_command("{unknown}", {{"solver", "x"}}));
  CHECK_THROWS(aero::render_command("{unterminated", {}));
}

TEST_CASE("coefficient table parsing") {
  SUBCASE("fixture final row carries the published lift coefficient") {
    auto content = util::read_file(testutil::data_dir() / "coefficient_fixture.dat");
    auto row = aero::parse_coefficient_table(content);
    CHECK(row.cl == doctest::Approx(0.96));
    CHECK(row.cd == doctest::Approx(0.0368));
    CHECK(row.time == 3000);
  }
  SUBCASE("non-finite final row classifies as divergence") {
    CHECK_THROWS_AS(aero::parse_coefficient_table("# header\n100 -0.1 0.02 0.5\n200 nan nan nan\n"),
                    aero::SolverDivergenceError);
  }
  SUBCASE("empty file is a missing output") {
    CHECK_THROWS_AS(aero::parse_coefficient_table("# only comments\n"), aero::MissingOutputError);
  }
}

TEST_CASE("case build writes the solver tree deterministically") {
  testutil::TempDir tmp("aero_case");
  auto ws = ProjectWorkspace::init(testutil::uav_spec(), tmp.path);
  auto config = make_case("NACA0012", 25, 0);
  auto coords = geometry::generate(geometry::parse_designator("NACA0012"), 120);
  const std::string d = ProjectWorkspace::case_dir_name(config);

  // geometry artifacts land first (published by the geometry agent)
  ws.publish(AgentRole::geometry, d + "/airfoil.dat", geometry::to_selig(coords));
  ws.publish(AgentRole::geometry, d + "/airfoil.geo", geometry::to_geo(coords, 0.1));

  aero::build_case(ws, config, coords);
  for (const char* p : {"/0/U", "/0/p", "/constant/transportProperties",
                        "/constant/turbulenceProperties", "/system/controlDict",
                        "/system/fvSolution", "/system/fvSchemes", "/Allrun", "/mesh.md"})
    CHECK(ws.has_artifact(d + p));

  auto fv = ws.read_for(AgentRole::aero, d + "/system/fvSolution");
  CHECK(fv.find("p               0.3;") != std::string::npos);
  CHECK(fv.find("U               0.7;") != std::string::npos);
  auto turb = ws.read_for(AgentRole::aero, d + "/constant/turbulenceProperties");
  CHECK(turb.find("SpalartAllmaras") != std::string::npos);
  auto mesh = ws.read_for(AgentRole::aero, d + "/mesh.md");
  CHECK(mesh.find("C-type") != std::string::npos);
  CHECK(mesh.find("40000-45000") != std::string::npos);

  SUBCASE("rebuild over the same case publishes identical bytes") {
    auto before = ws.record_for(d + "/system/fvSolution")->md5;
    aero::build_case(ws, config, coords);
    CHECK(ws.record_for(d + "/system/fvSolution")->md5 == before);
    CHECK(!ws.record_for(d + "/0/U")->md5.empty());
  }

  SUBCASE("recovery-adjusted relaxation is written through") {
    recovery::ErrorClass divergence{recovery::ErrorKind::kSolverDivergence, {}};
    recovery::SolverParams params;
    params.relaxation_pressure = 0.3;
    params.relaxation_velocity = 0.7;
    auto strat = recovery::strategy_for(divergence, 1, params);
    aero::CaseBuildOptions opts;
    opts.relaxation_pressure = strat.params.relaxation_pressure;
    opts.relaxation_velocity = strat.params.relaxation_velocity;
    aero::build_case(ws, config, coords, opts);
    auto fv2 = ws.read_for(AgentRole::aero, d + "/system/fvSolution");
    CHECK(fv2.find("p               0.3;") != std::string::npos);
    CHECK(fv2.find("U               0.2;") != std::string::npos);
  }
}

TEST_CASE("desk case run and extraction round-trip through the workspace") {
  testutil::TempDir tmp("aero_desk");
  auto ws = ProjectWorkspace::init(testutil::uav_spec(), tmp.path);
  auto config = make_case("NACA4412", 35, 4);
  auto airfoil = geometry::parse_designator("NACA4412");
  auto coords = geometry::generate(airfoil, 120);
  const std::string d = ProjectWorkspace::case_dir_name(config);

  ws.publish(AgentRole::geometry, d + "/airfoil.geo", geometry::to_geo(coords, 0.1));
  aero::build_case(ws, config, coords);
  auto solved = aero::run_desk_case(ws, config, airfoil, coords, 0.2);
  auto extracted = aero::extract_results(ws, config);

  CHECK(extracted.cl == doctest::Approx(solved.cl).epsilon(1e-12));
  CHECK(extracted.cd == doctest::Approx(solved.cd).epsilon(1e-12));
  CHECK(extracted.lift_to_drag == extracted.cl / extracted.cd);
  CHECK(ws.has_artifact(d + "/postProcessing/integrated/force_coefficients.csv"));
  CHECK(ws.has_artifact(d + "/postProcessing/integrated/boundary_layer.csv"));
  CHECK(ws.has_artifact(d + "/postProcessing/integrated/cp_data.csv"));
  CHECK(ws.has_artifact(d + "/acoustics_data/bpm_input.json"));
  CHECK(ws.has_artifact(d + "/VTK/airfoil_surface.vtk"));

  SUBCASE("missing solver output classifies as missing, not divergence") {
    auto other = make_case("NACA0015", 25, 2);
    CHECK_THROWS_AS(aero::extract_results(ws, other), aero::MissingOutputError);
  }
}
