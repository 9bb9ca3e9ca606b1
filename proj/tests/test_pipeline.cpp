#include <doctest.h>

#include <map>
#include <set>

#include "aeroforge/md5.hpp"
#include "aeroforge/pipeline.hpp"
#include "aeroforge/structures.hpp"
#include "aeroforge/util.hpp"
#include "aeroforge/workspace.hpp"
#include "test_helpers.hpp"

using namespace aeroforge;
using pipeline::PipelineOptions;
using pipeline::RunStatus;

namespace {

PipelineOptions base_options(const std::filesystem::path& root) {
  PipelineOptions o;
  o.root = root;
  o.data_dir = testutil::data_dir();
  o.serial = true;
  o.seed = 42;
  o.bo_budget = 8;
  o.retry_wait = [](int) {};  // simulated clock: no real backoff sleeps in tests
  return o;
}

bool is_timestamped(const std::string& rel) {
  return rel == "pipeline.log" || rel == "provenance.log" || rel == "run_report.json" ||
         util::starts_with(rel, "checkpoints/");
}

/// Digest of every non-timestamped file, keyed by relative path.
std::map<std::string, std::string> tree_digests(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (auto it = std::filesystem::recursive_directory_iterator(root);
       it != std::filesystem::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    std::string rel = std::filesystem::relative(it->path(), root).generic_string();
    if (is_timestamped(rel)) continue;
    out[rel] = util::Md5::hex(util::read_file(it->path()));
  }
  return out;
}

/// Publish entries with their timestamps stripped, for order-insensitive
/// equality between two runs (consume events depend on who inspected what).
std::multiset<std::string> provenance_essence(const std::filesystem::path& root) {
  std::multiset<std::string> out;
  for (const auto& line : util::split(util::read_file(root / "provenance.log"), '\n')) {
    if (util::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.value("event", "") != "publish") continue;
    j.erase("timestamp");
    out.insert(j.dump());
  }
  return out;
}

}  // namespace

TEST_CASE("full pipeline with injected reference results" * doctest::timeout(300)) {
  testutil::TempDir tmp("pipe_full");
  auto options = base_options(tmp.path);
  options.fixture_results = testutil::data_dir() / "paper_results_fixture.json";

  auto spec = testutil::uav_spec();
  auto summary = pipeline::run(spec, options);

  REQUIRE(summary.status == RunStatus::kSuccess);
  CHECK(summary.winner_airfoil == "NACA4412");
  CHECK(summary.sweep_total == 432);
  CHECK(summary.tasks_failed == 0);
  CHECK(summary.improvement_fraction >= 0.0);
  CHECK(summary.pareto_size >= 1);

  {  // the finished tree passes conformance and provenance audits
    auto ws = workspace::ProjectWorkspace::open(tmp.path);
    auto matrix = nlohmann::json::parse(
                      ws.read_for(workspace::AgentRole::planner, "airfoil/simulation_matrix.json"))
                      .get<domain::DesignMatrix>();
    REQUIRE(matrix.cases.size() == 12);
    auto rep = workspace::check_tree_conformance(tmp.path, matrix);
    CAPTURE(rep.missing);
    CHECK(rep.ok());
    CHECK(workspace::audit_provenance(ws).empty());
    CHECK(ws.audit_digests().empty());
  }

  {  // the sweep table has one row per configuration
    auto csv = util::read_file(tmp.path / "structural" / "structural_sweep.csv");
    CHECK(util::split(csv, '\n').size() == 434);  // header + 432 + trailing newline
    auto parsed = structures::parse_sweep_csv(csv);
    CHECK(parsed.size() == 432);
  }

  {  // the report carries the ranking and optimization summary
    auto md = util::read_file(tmp.path / "airfoil" / "result.md");
    CHECK(md.find("| Rank | Case | Airfoil | J |") != std::string::npos);
    CHECK(md.find("NACA4412") != std::string::npos);
    CHECK(md.find("## Optimization") != std::string::npos);
    CHECK(md.find("not completed") == std::string::npos);
    CHECK(util::read_file(tmp.path / "optimization" / "pareto_front.csv").size() > 0);
    CHECK(util::read_file(tmp.path / "optimization" / "gp_validation.csv").find("mass") !=
          std::string::npos);
  }

  {  // a second serial run is byte-identical apart from timestamps
    testutil::TempDir tmp2("pipe_repeat");
    auto options2 = base_options(tmp2.path);
    options2.fixture_results = options.fixture_results;
    auto summary2 = pipeline::run(spec, options2);
    REQUIRE(summary2.status == RunStatus::kSuccess);

    auto d1 = tree_digests(tmp.path);
    auto d2 = tree_digests(tmp2.path);
    REQUIRE(d1.size() == d2.size());
    for (const auto& [rel, digest] : d1) {
      CAPTURE(rel);
      REQUIRE(d2.count(rel) == 1);
      CHECK(d2.at(rel) == digest);
    }
    CHECK(provenance_essence(tmp.path) == provenance_essence(tmp2.path));
  }
}

TEST_CASE("desk-only pipeline selects a winner without fixtures" * doctest::timeout(300)) {
  testutil::TempDir tmp("pipe_desk");
  auto options = base_options(tmp.path);
  options.max_parallel = 4;
  options.serial = false;  // exercise the parallel path end to end
  auto summary = pipeline::run(testutil::uav_spec(), options);
  REQUIRE(summary.status == RunStatus::kSuccess);
  CHECK(!summary.winner_airfoil.empty());
  CHECK(summary.sweep_total == 432);

  // every case carries a plausible acoustic summary; velocity monotonicity at
  // fixed incidence is asserted at the acoustics-module level (the matrix
  // deliberately varies incidence together with velocity)
  auto csv = util::read_file(tmp.path / "airfoil" / "multi_case_analysis" / "acoustic_data.csv");
  auto lines = util::split(csv, '\n');
  std::size_t rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (util::trim(lines[i]).empty()) continue;
    auto f = util::split(lines[i], ',');
    double oa = util::parse_double(f[4]);
    double peak = util::parse_double(f[7]);
    CHECK(oa > 10.0);
    CHECK(oa < 160.0);
    CHECK(peak >= 100.0);
    CHECK(peak <= 10000.0);
    rows++;
  }
  CHECK(rows == 12);
}

TEST_CASE("interrupt after the aero phase, then resume to an identical tree" *
          doctest::timeout(300)) {
  auto spec = testutil::uav_spec();

  testutil::TempDir reference("pipe_ref");
  auto ref_options = base_options(reference.path);
  ref_options.fixture_results = testutil::data_dir() / "paper_results_fixture.json";
  REQUIRE(pipeline::run(spec, ref_options).status == RunStatus::kSuccess);

  testutil::TempDir tmp("pipe_resume");
  auto options = base_options(tmp.path);
  options.fixture_results = ref_options.fixture_results;
  options.stop_after_phase = "aero";
  auto interrupted = pipeline::run(spec, options);
  CHECK(interrupted.status == RunStatus::kInterrupted);
  CHECK(std::filesystem::exists(tmp.path / "checkpoints"));

  // aero tasks are complete; later phases have not run
  CHECK(!std::filesystem::exists(tmp.path / "structural" / "structural_sweep.csv"));

  auto resume_options = base_options(tmp.path);
  resume_options.fixture_results = ref_options.fixture_results;
  auto resumed = pipeline::resume(resume_options);
  REQUIRE(resumed.status == RunStatus::kSuccess);
  CHECK(resumed.winner_airfoil == "NACA4412");

  // completed aero tasks were not re-executed on resume
  {
    auto rr = nlohmann::json::parse(util::read_file(tmp.path / "run_report.json"));
    std::size_t done_in_resume = 0;
    bool saw_aero_rerun = false;
    for (const auto& n : rr.at("nodes")) {
      auto id = n.at("task_id").get<std::string>();
      auto status = n.at("status").get<std::string>();
      if (util::starts_with(id, "aero.") && status == "done" &&
          n.at("wall_seconds").get<double>() > 0.0)
        saw_aero_rerun = true;
      if (status == "done") done_in_resume++;
    }
    CHECK(!saw_aero_rerun);
    CHECK(done_in_resume > 0);
  }

  auto d_ref = tree_digests(reference.path);
  auto d_res = tree_digests(tmp.path);
  REQUIRE(d_ref.size() == d_res.size());
  for (const auto& [rel, digest] : d_ref) {
    CAPTURE(rel);
    REQUIRE(d_res.count(rel) == 1);
    CHECK(d_res.at(rel) == digest);
  }
}

TEST_CASE("validation failure and missing-checkpoint paths") {
  testutil::TempDir tmp("pipe_bad");
  auto options = base_options(tmp.path);

  auto bad = testutil::uav_spec();
  bad.chord_m = -1;
  CHECK(pipeline::run(bad, options).status == RunStatus::kValidationFailure);
  CHECK(pipeline::exit_code(RunStatus::kValidationFailure) == 2);

  testutil::TempDir fresh("pipe_fresh");
  auto ro = base_options(fresh.path);
  CHECK(pipeline::resume(ro).status == RunStatus::kNoCheckpoint);
  CHECK(pipeline::exit_code(RunStatus::kNoCheckpoint) == 3);
  CHECK(pipeline::exit_code(RunStatus::kSuccess) == 0);
  CHECK(pipeline::exit_code(RunStatus::kInterrupted) == 4);
}

TEST_CASE("report on a partial workspace marks the missing phases") {
  testutil::TempDir tmp("pipe_partial");
  auto spec = testutil::uav_spec();
  auto ws = workspace::ProjectWorkspace::init(spec, tmp.path);
  planner::ScriptedBackend backend;
  auto matrix = backend.generate_matrix(spec, 42);
  ws.publish(workspace::AgentRole::planner, "airfoil/simulation_matrix.json",
             nlohmann::json(matrix).dump() + "\n");

  CHECK(pipeline::write_report(tmp.path) == RunStatus::kSuccess);
  auto md = util::read_file(tmp.path / "airfoil" / "result.md");
  CHECK(md.find("not completed") != std::string::npos);
}
