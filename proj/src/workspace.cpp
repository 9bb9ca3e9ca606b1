#include "aeroforge/workspace.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aeroforge/md5.hpp"
#include "aeroforge/util.hpp"

namespace aeroforge::workspace {

using nlohmann::json;

std::string role_name(AgentRole r) {
  switch (r) {
    case AgentRole::planner: return "planner";
    case AgentRole::geometry: return "geometry";
    case AgentRole::aero: return "aerodynamics";
    case AgentRole::acoustics: return "acoustics";
    case AgentRole::structures: return "structures";
    case AgentRole::optimizer: return "optimizer";
  }
  throw std::logic_error("unknown role");
}

AgentRole role_from_name(const std::string& s) {
  if (s == "planner") return AgentRole::planner;
  if (s == "geometry") return AgentRole::geometry;
  if (s == "aerodynamics" || s == "aero") return AgentRole::aero;
  if (s == "acoustics") return AgentRole::acoustics;
  if (s == "structures") return AgentRole::structures;
  if (s == "optimizer") return AgentRole::optimizer;
  throw WorkspaceError("unknown agent role: " + s);
}

namespace {
constexpr const char* kLedgerFile = "provenance.log";
constexpr const char* kPipelineLog = "pipeline.log";
constexpr const char* kIdeaFile = "airfoil/idea.json";

std::atomic<std::uint64_t> g_temp_counter{0};
}  // namespace

ProjectWorkspace::ProjectWorkspace(ProjectWorkspace&& other) noexcept { *this = std::move(other); }

ProjectWorkspace& ProjectWorkspace::operator=(ProjectWorkspace&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lk(other.mu_);
    root_ = std::move(other.root_);
    index_ = std::move(other.index_);
    in_flight_ = std::move(other.in_flight_);
  }
  return *this;
}

ProjectWorkspace::~ProjectWorkspace() = default;

ProjectWorkspace ProjectWorkspace::init(const domain::RequirementSpec& spec, const fs::path& root,
                                        bool force) {
  std::error_code ec;
  if (fs::exists(root)) {
    if (!fs::is_directory(root)) throw WorkspaceError("root exists and is not a directory");
    if (!fs::is_empty(root) && !force)
      throw WorkspaceError("root is not empty; pass force to re-initialize: " + root.string());
    if (!fs::is_empty(root) && force) fs::remove_all(root);
  }
  fs::create_directories(root, ec);
  if (ec) throw WorkspaceError("cannot create root: " + root.string() + ": " + ec.message());

  // probe writability early
  {
    std::ofstream probe(root / kPipelineLog, std::ios::app);
    if (!probe) throw WorkspaceError("root not writable: " + root.string());
  }

  fs::create_directories(root / "airfoil" / "multi_case_analysis");
  fs::create_directories(root / "checkpoints");
  fs::create_directories(root / "knowledge");

  ProjectWorkspace ws;
  ws.root_ = fs::absolute(root);
  ws.publish(AgentRole::planner, kIdeaFile, json(spec).dump(2) + "\n");
  ws.log("workspace initialized");
  return ws;
}

ProjectWorkspace ProjectWorkspace::open(const fs::path& root) {
  if (!fs::exists(root / kLedgerFile))
    throw WorkspaceError("not a project workspace (no provenance ledger): " + root.string());
  ProjectWorkspace ws;
  ws.root_ = fs::absolute(root);
  std::ifstream in(root / kLedgerFile);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.at("event") != "publish") continue;
    ArtifactRecord rec;
    rec.path = j.at("path").get<std::string>();
    rec.producer = role_from_name(j.at("producer").get<std::string>());
    rec.md5 = j.at("md5").get<std::string>();
    rec.timestamp = j.at("timestamp").get<std::string>();
    ws.index_[rec.path] = rec;  // later entries supersede earlier ones
  }
  return ws;
}

fs::path ProjectWorkspace::resolve(const std::string& rel_path) const {
  fs::path p = (root_ / rel_path).lexically_normal();
  auto [it, _] = std::mismatch(root_.begin(), root_.end(), p.begin(), p.end());
  if (it != root_.end())
    throw PathEscapeError("path escapes workspace root: " + rel_path);
  return p;
}

void ProjectWorkspace::append_ledger_line(const std::string& line) {
  std::ofstream out(root_ / kLedgerFile, std::ios::app);
  out << line << "\n";
}

ArtifactRecord ProjectWorkspace::publish(AgentRole producer, const std::string& rel_path,
                                         std::string_view content, bool overwrite) {
  fs::path target = resolve(rel_path);
  std::string norm = fs::path(rel_path).lexically_normal().generic_string();

  {
    std::scoped_lock lk(mu_);
    if (in_flight_.count(norm))
      throw DuplicatePublishError("concurrent publish to same path: " + norm);
    if (index_.count(norm) && !overwrite)
      throw DuplicatePublishError("path already published: " + norm);
    in_flight_.insert(norm);
  }

  ArtifactRecord rec;
  try {
    fs::create_directories(target.parent_path());
    std::string digest = util::Md5::hex(std::string_view(content.data(), content.size()));

    fs::path tmp = target.parent_path() /
                   (".tmp_" + std::to_string(g_temp_counter.fetch_add(1)) + "_" +
                    target.filename().string());
    util::write_file(tmp, content);
    fs::rename(tmp, target);

    // read-back verification
    std::string back = util::read_file(target);
    if (util::Md5::hex(back) != digest) {
      throw DigestMismatchError("digest mismatch on read-back: " + norm);
    }

    rec.path = norm;
    rec.producer = producer;
    rec.md5 = digest;
    rec.timestamp = util::utc_timestamp();

    json entry{{"event", "publish"},
               {"path", rec.path},
               {"producer", role_name(producer)},
               {"md5", rec.md5},
               {"timestamp", rec.timestamp}};
    {
      std::scoped_lock lk(mu_);
      append_ledger_line(entry.dump());
      index_[norm] = rec;
      in_flight_.erase(norm);
    }
  } catch (...) {
    std::scoped_lock lk(mu_);
    in_flight_.erase(norm);
    throw;
  }
  return rec;
}

std::string ProjectWorkspace::read_for(AgentRole consumer, const std::string& rel_path) {
  fs::path target = resolve(rel_path);
  std::string norm = fs::path(rel_path).lexically_normal().generic_string();
  ArtifactRecord rec;
  {
    std::scoped_lock lk(mu_);
    auto it = index_.find(norm);
    if (it == index_.end()) throw MissingArtifactError("artifact not in ledger: " + norm);
    rec = it->second;
  }
  std::string content = util::read_file(target);
  if (util::Md5::hex(content) != rec.md5)
    throw DigestMismatchError("artifact corrupted (digest mismatch): " + norm);
  json entry{{"event", "consume"},
             {"path", norm},
             {"consumer", role_name(consumer)},
             {"timestamp", util::utc_timestamp()}};
  {
    std::scoped_lock lk(mu_);
    append_ledger_line(entry.dump());
  }
  return content;
}

bool ProjectWorkspace::has_artifact(const std::string& rel_path) const {
  std::scoped_lock lk(mu_);
  return index_.count(fs::path(rel_path).lexically_normal().generic_string()) > 0;
}

std::optional<ArtifactRecord> ProjectWorkspace::record_for(const std::string& rel_path) const {
  std::scoped_lock lk(mu_);
  auto it = index_.find(fs::path(rel_path).lexically_normal().generic_string());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<ArtifactRecord> ProjectWorkspace::ledger() const {
  std::scoped_lock lk(mu_);
  std::vector<ArtifactRecord> out;
  out.reserve(index_.size());
  for (const auto& [_, rec] : index_) out.push_back(rec);
  return out;
}

std::string ProjectWorkspace::case_dir_name(const domain::CaseConfig& c) {
  std::ostringstream ss;
  ss << "sim_" << c.airfoil << "_" << util::num_str(c.velocity_ms) << "ms_aoa"
     << util::num_str(c.aoa_deg);
  return ss.str();
}

void ProjectWorkspace::log(std::string_view message) {
  std::scoped_lock lk(mu_);
  std::ofstream out(root_ / kPipelineLog, std::ios::app);
  out << util::utc_timestamp() << " " << message << "\n";
}

std::vector<std::string> ProjectWorkspace::audit_digests(const std::string& prefix) const {
  std::vector<std::string> problems;
  for (const auto& rec : ledger()) {
    if (!prefix.empty() && !util::starts_with(rec.path, prefix)) continue;
    fs::path p = root_ / rec.path;
    if (!fs::exists(p)) {
      problems.push_back("missing: " + rec.path);
      continue;
    }
    if (util::Md5::hex(util::read_file(p)) != rec.md5) problems.push_back("digest: " + rec.path);
  }
  return problems;
}

domain::RequirementSpec ProjectWorkspace::read_spec() {
  return json::parse(read_for(AgentRole::planner, kIdeaFile)).get<domain::RequirementSpec>();
}

ConformanceReport check_tree_conformance(const fs::path& root, const domain::DesignMatrix& matrix) {
  ConformanceReport rep;
  auto need = [&](const std::string& rel) {
    if (!fs::exists(root / rel)) rep.missing.push_back(rel);
  };
  need("pipeline.log");
  need("provenance.log");
  need("airfoil/idea.json");
  need("airfoil/result.md");
  need("airfoil/aerodynamics_plan.md");
  need("airfoil/acoustics_plan.md");
  need("airfoil/multi_case_analysis/aerodynamic_data.csv");
  need("airfoil/multi_case_analysis/acoustic_data.csv");
  for (const auto& c : matrix.cases) {
    std::string d = ProjectWorkspace::case_dir_name(c);
    need(d + "/mesh.md");
    need(d + "/airfoil.geo");
    need(d + "/constant");
    need(d + "/system");
    need(d + "/0");
    need(d + "/Allrun");
    need(d + "/acoustics_data/bpm_input.json");
    need(d + "/acoustics_data/boundary_layer.json");
    need(d + "/acoustics_data/flow_field.json");
    need(d + "/postProcessing/forceCoeffs/0/coefficient.dat");
    need(d + "/postProcessing/integrated/force_coefficients.csv");
    need(d + "/postProcessing/integrated/boundary_layer.csv");
    need(d + "/postProcessing/integrated/cp_data.csv");
    need(d + "/postProcessing/integrated/acoustics/acoustic_metrics.csv");
    need(d + "/postProcessing/integrated/acoustics/third_octave_spectrum.csv");
    need(d + "/VTK");
  }
  return rep;
}

std::vector<std::string> audit_provenance(const ProjectWorkspace& ws) {
  std::vector<std::string> problems;
  std::set<std::string> known;
  for (const auto& rec : ws.ledger()) known.insert(rec.path);
  // knowledge notes carry their producer in front matter; checkpoints have
  // metadata sidecars of their own
  static const std::vector<std::string> exempt_prefixes = {
      "pipeline.log", "provenance.log", "run_report.json", "checkpoints/", "knowledge/"};
  for (auto it = fs::recursive_directory_iterator(ws.root()); it != fs::recursive_directory_iterator();
       ++it) {
    if (!it->is_regular_file()) continue;
    std::string rel = fs::relative(it->path(), ws.root()).generic_string();
    bool exempt = false;
    for (const auto& pre : exempt_prefixes)
      if (rel == pre || util::starts_with(rel, pre)) exempt = true;
    if (exempt) continue;
    if (!known.count(rel)) problems.push_back("no producer entry: " + rel);
  }
  return problems;
}

std::string vtk_point_snapshot(const std::string& title, const std::vector<double>& xs,
                               const std::vector<double>& ys, const std::vector<double>& zs,
                               const std::string& scalar_name, const std::vector<double>& values) {
  if (xs.size() != ys.size() || xs.size() != zs.size() || xs.size() != values.size())
    throw std::invalid_argument("vtk_point_snapshot: size mismatch");
  std::ostringstream ss;
  ss << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
  ss << "POINTS " << xs.size() << " double\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    ss << util::num_str(xs[i]) << " " << util::num_str(ys[i]) << " " << util::num_str(zs[i]) << "\n";
  ss << "POINT_DATA " << xs.size() << "\nSCALARS " << scalar_name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) ss << util::num_str(v) << "\n";
  return ss.str();
}

}  // namespace aeroforge::workspace
