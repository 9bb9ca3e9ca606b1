#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace aeroforge::knowledge {

struct Note {
  std::string id;
  std::string body;
  std::vector<std::string> tags;
  std::string producer;
  std::string timestamp;
};

struct RankedNote {
  Note note;
  double score = 0.0;
};

/// Local keyword-indexed note store backing the agents' knowledge queries.
/// Notes are plain-text files with a small front-matter header; the store is
/// append-only and queries never mutate it.
class KnowledgeStore {
 public:
  explicit KnowledgeStore(std::filesystem::path dir);

  /// Copies the bundled seed notes (material tables, load-factor conventions)
  /// into the store directory.
  void seed_from(const std::filesystem::path& bundled_dir);

  /// Term-frequency ranking over note bodies and tags. Deterministic: ties
  /// break on note id. An empty result is a valid answer.
  std::vector<RankedNote> query(const std::string& terms) const;

  std::string record_finding(const std::string& body, const std::vector<std::string>& tags,
                             const std::string& producer);

  std::vector<Note> all_notes() const;

 private:
  std::filesystem::path dir_;
};

}  // namespace aeroforge::knowledge
