#include "aeroforge/knowledge.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <sstream>

#include "aeroforge/util.hpp"

namespace aeroforge::knowledge {

namespace fs = std::filesystem;

namespace {
std::atomic<std::uint64_t> g_note_counter{0};

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : util::lower(text)) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}
}  // namespace

KnowledgeStore::KnowledgeStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

void KnowledgeStore::seed_from(const fs::path& bundled_dir) {
  if (!fs::exists(bundled_dir)) return;
  for (const auto& e : fs::directory_iterator(bundled_dir)) {
    if (!e.is_regular_file()) continue;
    fs::copy_file(e.path(), dir_ / e.path().filename(), fs::copy_options::overwrite_existing);
  }
}

std::vector<Note> KnowledgeStore::all_notes() const {
  std::vector<Note> notes;
  if (!fs::exists(dir_)) return notes;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.is_regular_file() && e.path().extension() == ".md") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    Note n;
    n.id = f.stem().string();
    std::string text = util::read_file(f);
    // front matter: lines of "key: value" up to the first blank line
    std::istringstream in(text);
    std::string line;
    bool in_header = true;
    std::ostringstream body;
    while (std::getline(in, line)) {
      if (in_header) {
        if (util::trim(line).empty()) {
          in_header = false;
          continue;
        }
        auto pos = line.find(':');
        if (pos == std::string::npos) {
          in_header = false;
          body << line << "\n";
          continue;
        }
        std::string key = std::string(util::trim(line.substr(0, pos)));
        std::string value = std::string(util::trim(line.substr(pos + 1)));
        if (key == "tags") {
          for (auto& t : util::split(value, ','))
            if (!util::trim(t).empty()) n.tags.emplace_back(util::trim(t));
        } else if (key == "producer") {
          n.producer = value;
        } else if (key == "timestamp") {
          n.timestamp = value;
        }
      } else {
        body << line << "\n";
      }
    }
    n.body = body.str();
    notes.push_back(std::move(n));
  }
  return notes;
}

std::vector<RankedNote> KnowledgeStore::query(const std::string& terms) const {
  auto query_tokens = tokenize(terms);
  std::vector<RankedNote> ranked;
  for (const auto& n : all_notes()) {
    std::map<std::string, int> tf;
    for (const auto& tok : tokenize(n.body)) tf[tok]++;
    for (const auto& tag : n.tags)
      for (const auto& tok : tokenize(tag)) tf[tok] += 3;  // tags weigh more
    double score = 0.0;
    for (const auto& q : query_tokens) {
      auto it = tf.find(q);
      if (it != tf.end()) score += it->second;
    }
    if (score > 0) ranked.push_back({n, score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedNote& a, const RankedNote& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.note.id < b.note.id;
  });
  return ranked;
}

std::string KnowledgeStore::record_finding(const std::string& body,
                                           const std::vector<std::string>& tags,
                                           const std::string& producer) {
  if (util::trim(body).empty()) throw std::invalid_argument("empty note");
  std::string id = "note_" + util::utc_timestamp() + "_" + std::to_string(g_note_counter.fetch_add(1));
  std::replace(id.begin(), id.end(), ':', '-');
  std::ostringstream ss;
  ss << "tags: ";
  for (std::size_t i = 0; i < tags.size(); ++i) ss << (i ? ", " : "") << tags[i];
  ss << "\nproducer: " << producer << "\ntimestamp: " << util::utc_timestamp() << "\n\n" << body << "\n";
  util::write_file(dir_ / (id + ".md"), ss.str());
  return id;
}

}  // namespace aeroforge::knowledge
