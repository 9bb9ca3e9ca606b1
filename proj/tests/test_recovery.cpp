#include <doctest.h>

#include <fstream>

#include "aeroforge/recovery.hpp"
#include "aeroforge/util.hpp"
#include "test_helpers.hpp"

using namespace aeroforge;
using namespace aeroforge::recovery;
using nlohmann::json;

namespace {

LogClassifier classifier() {
  return LogClassifier::from_file(testutil::data_dir() / "error_patterns.json");
}

}  // namespace

TEST_CASE("log classification") {
  auto c = classifier();

  SUBCASE("labeled corpus accuracy is at least 95 percent") {
    auto corpus = json::parse(util::read_file(testutil::data_dir() / "log_corpus.json"));
    std::size_t correct = 0, total = 0;
    for (const auto& entry : corpus.at("entries")) {
      auto expected = error_kind_from_name(entry.at("label").get<std::string>());
      auto got = c.classify(entry.at("text").get<std::string>());
      if (got.kind == expected) correct++;
      total++;
      if (got.kind != expected) {
        CAPTURE(entry.at("text").get<std::string>());
        CHECK(error_kind_name(got.kind) == entry.at("label").get<std::string>());
      }
    }
    REQUIRE(total >= 20);
    CHECK(static_cast<double>(correct) / total >= 0.95);
  }

  SUBCASE("divergence evidence lines are returned") {
    auto ec = c.classify("Time = 12\nFloating point exception (core dumped)\nresiduals exploding");
    CHECK(ec.kind == ErrorKind::kSolverDivergence);
    REQUIRE(!ec.evidence.empty());
    CHECK(ec.evidence[0].find("Floating point exception") != std::string::npos);
  }

  SUBCASE("unknown patch complaints are boundary errors") {
    auto ec = c.classify("--> FOAM FATAL ERROR: Unknown patch type 'wals'");
    CHECK(ec.kind == ErrorKind::kBoundaryConditionError);
  }

  SUBCASE("empty logs are unknown") {
    CHECK(c.classify("").kind == ErrorKind::kUnknown);
  }

  SUBCASE("classification is pure") {
    const std::string logs = "checkMesh failed: 2 errors found\nUnknown patch type 'walls'";
    auto a = c.classify(logs);
    auto b = c.classify(logs);
    CHECK(a.kind == b.kind);
    CHECK(a.evidence == b.evidence);
    // mesh rules precede boundary rules, so the mesh class wins here
    CHECK(a.kind == ErrorKind::kMeshConversionFailure);
  }
}

TEST_CASE("recovery strategies follow the domain table") {
  SolverParams initial;  // refinement 1.0, relaxation 0.3/0.7, dt scale 1.0

  SUBCASE("mesh failures shrink refinement by 0.8 per attempt") {
    ErrorClass mesh{ErrorKind::kMeshConversionFailure, {}};
    auto s1 = strategy_for(mesh, 1, initial);
    CHECK(s1.action == "regenerate_mesh");
    CHECK(s1.params.refinement_scale == doctest::Approx(0.8));
    auto s2 = strategy_for(mesh, 2, s1.params);
    CHECK(s2.params.refinement_scale == doctest::Approx(0.64));
  }

  SUBCASE("divergence pins relaxation to 0.3/0.2 and halves the time step") {
    ErrorClass div{ErrorKind::kSolverDivergence, {}};
    auto s = strategy_for(div, 1, initial);
    CHECK(s.action == "adjust_relaxation");
    CHECK(s.params.relaxation_pressure == doctest::Approx(0.3));
    CHECK(s.params.relaxation_velocity == doctest::Approx(0.2));
    CHECK(s.params.time_step_scale == doctest::Approx(0.5));
  }

  SUBCASE("boundary failures remap patch types") {
    ErrorClass bc{ErrorKind::kBoundaryConditionError, {}};
    auto s = strategy_for(bc, 1, initial);
    CHECK(s.action == "correct_patches");
    CHECK(s.params.patch_type_remap.at("walls") == "wall");
    CHECK(s.params.patch_type_remap.at("front") == "empty");
    CHECK(s.params.patch_type_remap.at("back") == "empty");
  }

  SUBCASE("resource exhaustion and unknown errors clean up and retry") {
    for (auto kind : {ErrorKind::kResourceExhaustion, ErrorKind::kUnknown}) {
      auto s = strategy_for({kind, {}}, 1, initial);
      CHECK(s.action == "default_recovery");
      CHECK(s.params.cleanup_requested);
      CHECK(s.params.relaxation_pressure == initial.relaxation_pressure);
    }
  }

  SUBCASE("parameters never leave their physical bounds") {
    SolverParams p;
    for (int attempt = 1; attempt <= 12; ++attempt) {
      for (auto kind : {ErrorKind::kMeshConversionFailure, ErrorKind::kSolverDivergence}) {
        p = strategy_for({kind, {}}, attempt, p).params;
        CHECK(p.refinement_scale > 0.0);
        CHECK(p.refinement_scale <= 1.0);
        CHECK(p.relaxation_pressure > 0.0);
        CHECK(p.relaxation_pressure <= 1.0);
        CHECK(p.relaxation_velocity > 0.0);
        CHECK(p.relaxation_velocity <= 1.0);
        CHECK(p.time_step_scale > 0.0);
        CHECK(p.time_step_scale <= 1.0);
      }
    }
  }

  CHECK_THROWS(strategy_for({ErrorKind::kUnknown, {}}, 0, initial));
}

TEST_CASE("checkpoint store") {
  testutil::TempDir tmp("ckpt");
  CheckpointStore store(tmp.path, 10);

  SUBCASE("round-trip preserves state field by field") {
    json state{{"phase", "aero"}, {"values", {1.5, 2.5}}, {"nested", {{"k", "v"}}}};
    auto cp = store.save("aero", 42.5, state);
    CHECK(cp.phase == "aero");
    CHECK(cp.progress_percent == 42.5);
    auto back = store.restore(cp);
    CHECK(back == state);
  }

  SUBCASE("eleven saves leave ten checkpoints, oldest evicted") {
    std::vector<std::string> ids;
    for (int i = 0; i < 11; ++i)
      ids.push_back(store.save("phase", i, json{{"i", i}}).checkpoint_id);
    auto all = store.list();
    REQUIRE(all.size() == 10);
    CHECK(all.front().checkpoint_id == ids[1]);  // the first one is gone
    CHECK(all.back().checkpoint_id == ids[10]);
    CHECK(!std::filesystem::exists(tmp.path / (ids[0] + ".state.gz")));
  }

  SUBCASE("a flipped byte is detected and skipped by latest-valid restore") {
    store.save("p1", 10, json{{"ok", 1}});
    auto cp2 = store.save("p2", 20, json{{"ok", 2}});

    // corrupt the newest blob
    auto blob_path = tmp.path / (cp2.checkpoint_id + ".state.gz");
    auto blob = util::read_file(blob_path);
    blob[blob.size() / 2] = static_cast<char>(blob[blob.size() / 2] ^ 0x40);
    util::write_file(blob_path, blob);

    CHECK_THROWS_AS(store.restore(cp2), CheckpointCorruptError);
    auto latest = store.restore_latest_valid();
    REQUIRE(latest.has_value());
    CHECK(latest->second.at("ok") == 1);  // fell back to the older valid one
  }

  SUBCASE("numbering continues after reopening the store") {
    auto a = store.save("p", 0, json{{"n", 1}});
    CheckpointStore reopened(tmp.path, 10);
    auto b = reopened.save("p", 0, json{{"n", 2}});
    CHECK(b.checkpoint_id > a.checkpoint_id);
  }
}

TEST_CASE("retry loop") {
  auto c = classifier();
  std::vector<int> waits;
  RetryOptions opts;
  opts.wait_seconds = [&](int s) { waits.push_back(s); };  // simulated clock

  SUBCASE("success on the first attempt takes no waits") {
    auto outcome = retry_loop(json{{"x", 1}}, {}, [](const json& s, const SolverParams&) { return s; },
                              c, nullptr, opts);
    CHECK(outcome.success);
    CHECK(outcome.attempts == 1);
    CHECK(waits.empty());
  }

  SUBCASE("success on the second attempt waits exactly two seconds") {
    int calls = 0;
    auto outcome = retry_loop(
        json::object(), {},
        [&](const json& s, const SolverParams&) -> json {
          if (++calls == 1)
            throw scheduler::TaskExecutionError("diverged", "solution diverged at iteration 99");
          return s;
        },
        c, nullptr, opts);
    CHECK(outcome.success);
    CHECK(outcome.attempts == 2);
    CHECK(waits == std::vector<int>{2});
  }

  SUBCASE("exhaustion takes exactly three attempts with waits of 2 then 4 seconds") {
    int calls = 0;
    auto outcome = retry_loop(
        json::object(), {},
        [&](const json&, const SolverParams&) -> json {
          ++calls;
          throw scheduler::TaskExecutionError("diverged", "Floating point exception");
        },
        c, nullptr, opts);
    CHECK(!outcome.success);
    CHECK(outcome.attempts == 3);
    CHECK(calls == 3);
    CHECK(waits == std::vector<int>{2, 4});
    CHECK(outcome.last_error == ErrorKind::kSolverDivergence);
  }

  SUBCASE("strategies adjust parameters between attempts") {
    std::vector<SolverParams> seen;
    retry_loop(
        json::object(), {},
        [&](const json&, const SolverParams& p) -> json {
          seen.push_back(p);
          throw scheduler::TaskExecutionError("diverged", "solution diverged");
        },
        c, nullptr, opts);
    REQUIRE(seen.size() == 3);
    CHECK(seen[0].relaxation_velocity == doctest::Approx(0.7));  // initial defaults
    CHECK(seen[1].relaxation_velocity == doctest::Approx(0.2));  // pinned by the table
    CHECK(seen[1].time_step_scale == doctest::Approx(0.5));
    CHECK(seen[2].time_step_scale == doctest::Approx(0.25));  // tightened again
  }

  SUBCASE("rollback restores the last valid checkpoint between attempts") {
    testutil::TempDir tmp("retry_ckpt");
    CheckpointStore store(tmp.path, 10);
    const json good{{"counter", 7}, {"phase", "aero"}};
    store.save("aero", 50, good);

    int calls = 0;
    auto outcome = retry_loop(
        json{{"counter", -1}}, {},
        [&](const json& state, const SolverParams&) -> json {
          // every attempt must observe the checkpointed state, not leftovers
          CHECK(state == good);
          ++calls;
          throw scheduler::TaskExecutionError("mesh", "mesh generation failed");
        },
        c, &store, opts);
    CHECK(!outcome.success);
    CHECK(calls == 3);
    CHECK(outcome.final_state == good);
    CHECK(outcome.last_error == ErrorKind::kMeshConversionFailure);
  }

  SUBCASE("integrity validation failures count as failed attempts") {
    RetryOptions strict = opts;
    strict.validate_integrity = [](const json&) { return false; };
    auto outcome = retry_loop(json::object(), {},
                              [](const json& s, const SolverParams&) { return s; }, c, nullptr,
                              strict);
    CHECK(!outcome.success);
    CHECK(outcome.attempts == 3);
  }
}
