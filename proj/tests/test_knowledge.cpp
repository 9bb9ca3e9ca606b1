#include <doctest.h>

#include "aeroforge/knowledge.hpp"
#include "test_helpers.hpp"

using namespace aeroforge;

TEST_CASE("bundled notes answer material queries") {
  testutil::TempDir tmp("kb");
  knowledge::KnowledgeStore kb(tmp.path);
  kb.seed_from(testutil::data_dir() / "knowledge");

  auto hits = kb.query("7075-T6 density");
  REQUIRE(!hits.empty());
  CHECK(hits.front().note.body.find("2810") != std::string::npos);

  SUBCASE("unknown terms give an empty result") {
    CHECK(kb.query("unobtainium phase diagram").empty());
  }
  SUBCASE("ranking is deterministic") {
    auto a = kb.query("load factor landing");
    auto b = kb.query("load factor landing");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].note.id == b[i].note.id);
  }
}

TEST_CASE("recorded findings are retrievable and never deduplicated") {
  testutil::TempDir tmp("kb_rec");
  knowledge::KnowledgeStore kb(tmp.path);

  auto id1 = kb.record_finding("rib spacing under 18 mm cracks at the aft attachment",
                               {"known-failure", "ribs"}, "structures");
  auto id2 = kb.record_finding("rib spacing under 18 mm cracks at the aft attachment",
                               {"known-failure", "ribs"}, "structures");
  CHECK(id1 != id2);

  auto hits = kb.query("known-failure");
  CHECK(hits.size() == 2);
  CHECK(hits.front().note.producer == "structures");

  CHECK_THROWS(kb.record_finding("   ", {}, "structures"));
}
