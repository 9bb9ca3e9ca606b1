#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aeroforge/domain.hpp"

namespace aeroforge::workspace {

namespace fs = std::filesystem;

enum class AgentRole { planner, geometry, aero, acoustics, structures, optimizer };

std::string role_name(AgentRole r);
AgentRole role_from_name(const std::string& s);

struct WorkspaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PathEscapeError : WorkspaceError {
  using WorkspaceError::WorkspaceError;
};
struct MissingArtifactError : WorkspaceError {
  using WorkspaceError::WorkspaceError;
};
struct DigestMismatchError : WorkspaceError {
  using WorkspaceError::WorkspaceError;
};
struct DuplicatePublishError : WorkspaceError {
  using WorkspaceError::WorkspaceError;
};

struct ArtifactRecord {
  std::string path;  // relative to the workspace root
  AgentRole producer = AgentRole::planner;
  std::string md5;
  std::string timestamp;
};

/// File-mediated data exchange: agents read and write project files only
/// through this layer. Every publish lands atomically (temp + rename) and is
/// recorded in an append-only provenance ledger at the project root.
class ProjectWorkspace {
 public:
  /// Creates the project skeleton and persists the requirement spec as the
  /// idea document. Fails on a non-empty root unless force is set.
  static ProjectWorkspace init(const domain::RequirementSpec& spec, const fs::path& root,
                               bool force = false);

  /// Opens an existing workspace, replaying the provenance ledger.
  static ProjectWorkspace open(const fs::path& root);

  ProjectWorkspace(ProjectWorkspace&&) noexcept;
  ProjectWorkspace& operator=(ProjectWorkspace&&) noexcept;
  ~ProjectWorkspace();

  const fs::path& root() const { return root_; }

  ArtifactRecord publish(AgentRole producer, const std::string& rel_path, std::string_view content,
                         bool overwrite = false);
  std::string read_for(AgentRole consumer, const std::string& rel_path);
  bool has_artifact(const std::string& rel_path) const;
  std::optional<ArtifactRecord> record_for(const std::string& rel_path) const;
  std::vector<ArtifactRecord> ledger() const;

  /// Case directory name, e.g. sim_NACA0012_25ms_aoa0.
  static std::string case_dir_name(const domain::CaseConfig& c);

  void log(std::string_view message);

  /// Verifies ledger digests against the files on disk; a nonempty prefix
  /// restricts the audit to artifacts under that path.
  std::vector<std::string> audit_digests(const std::string& prefix = "") const;

  domain::RequirementSpec read_spec();

 private:
  ProjectWorkspace() = default;
  fs::path resolve(const std::string& rel_path) const;
  void append_ledger_line(const std::string& line);

  fs::path root_;
  mutable std::mutex mu_;
  std::map<std::string, ArtifactRecord> index_;
  std::set<std::string> in_flight_;
};

/// Result of checking a finished workspace against the expected project tree.
struct ConformanceReport {
  std::vector<std::string> missing;
  bool ok() const { return missing.empty(); }
};

/// Checks the mandatory project-tree layout: root documents, the per-case
/// solver tree and integrated outputs for every case in the matrix.
ConformanceReport check_tree_conformance(const fs::path& root, const domain::DesignMatrix& matrix);

/// Every artifact file under the tree must have exactly one producer entry.
/// Operational files (logs, ledger, checkpoints, run report) are exempt.
std::vector<std::string> audit_provenance(const ProjectWorkspace& ws);

/// Minimal legacy-VTK polydata writer for point snapshots with one scalar.
std::string vtk_point_snapshot(const std::string& title, const std::vector<double>& xs,
                               const std::vector<double>& ys, const std::vector<double>& zs,
                               const std::string& scalar_name, const std::vector<double>& values);

}  // namespace aeroforge::workspace
