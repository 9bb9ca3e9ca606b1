#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aeroforge::recovery {

struct RecoveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointCorruptError : RecoveryError {
  using RecoveryError::RecoveryError;
};
struct ResourceExhaustionError : RecoveryError {
  using RecoveryError::RecoveryError;
};

enum class ErrorKind {
  kMeshConversionFailure,
  kSolverDivergence,
  kBoundaryConditionError,
  kResourceExhaustion,
  kUnknown
};

std::string error_kind_name(ErrorKind k);
ErrorKind error_kind_from_name(const std::string& s);

struct ErrorClass {
  ErrorKind kind = ErrorKind::kUnknown;
  std::vector<std::string> evidence;  // matched log lines
};

/// Ordered regex rules over tool logs. Rule order is fixed: mesh patterns,
/// divergence patterns, boundary patterns, resource patterns; the first
/// matching rule wins and Unknown means nothing matched. The rule table is a
/// data file so the corpus can grow without rebuilds.
class LogClassifier {
 public:
  static LogClassifier from_file(const std::filesystem::path& rules_json);
  static LogClassifier from_json(const nlohmann::json& rules);

  ErrorClass classify(const std::string& logs) const;

 private:
  struct Rule {
    ErrorKind kind;
    std::regex pattern;
    std::string source;
  };
  std::vector<Rule> rules_;
};

/// Solver-facing parameters that recovery strategies adjust. All values stay
/// within physical bounds.
struct SolverParams {
  double refinement_scale = 1.0;       // (0, 1]
  double relaxation_pressure = 0.3;    // (0, 1]
  double relaxation_velocity = 0.7;    // (0, 1]
  double time_step_scale = 1.0;        // (0, 1]
  std::map<std::string, std::string> patch_type_remap;
  bool cleanup_requested = false;
};

void to_json(nlohmann::json& j, const SolverParams& p);
void from_json(const nlohmann::json& j, SolverParams& p);

struct RecoveryStrategy {
  std::string action;  // regenerate_mesh | adjust_relaxation | correct_patches | default_recovery
  SolverParams params;
};

/// Domain-specific strategy table: mesh failures scale refinement by 0.8,
/// divergence pins relaxation to 0.3/0.2 and halves the time step, boundary
/// errors remap patch types, everything else cleans up and retries. Repeat
/// attempts tighten the parameters further, never past their bounds.
RecoveryStrategy strategy_for(const ErrorClass& error, int attempt, const SolverParams& current);

struct Checkpoint {
  std::string checkpoint_id;
  std::string phase;
  double progress_percent = 0.0;
  std::string digest;  // MD5 of the compressed state blob
  std::string timestamp;
};

/// Compressed serialized pipeline states with metadata sidecars, pruned to a
/// sliding window of the newest entries.
class CheckpointStore {
 public:
  explicit CheckpointStore(std::filesystem::path dir, std::size_t window = 10);

  Checkpoint save(const std::string& phase, double progress_percent,
                  const nlohmann::json& state);
  nlohmann::json restore(const Checkpoint& cp) const;
  /// Newest checkpoint whose blob still matches its digest.
  std::optional<std::pair<Checkpoint, nlohmann::json>> restore_latest_valid() const;
  std::vector<Checkpoint> list() const;  // oldest first
  std::size_t window() const { return window_; }

 private:
  std::filesystem::path dir_;
  std::size_t window_;
};

struct RetryOptions {
  int max_retries = 3;
  /// Injectable clock; default sleeps for real.
  std::function<void(int)> wait_seconds;
  /// Post-success integrity validation; default accepts.
  std::function<bool(const nlohmann::json&)> validate_integrity;
};

struct RetryOutcome {
  bool success = false;
  int attempts = 0;
  std::vector<int> waits_s;  // backoff waits actually taken
  nlohmann::json final_state;
  SolverParams final_params;
  ErrorKind last_error = ErrorKind::kUnknown;
};

using StatefulExecutor =
    std::function<nlohmann::json(const nlohmann::json& state, const SolverParams& params)>;

/// Algorithm: execute; on failure classify the logs, pick a strategy, roll the
/// state back to the last valid checkpoint, wait 2^attempt seconds, retry; at
/// most max_retries executions. Success requires integrity validation.
RetryOutcome retry_loop(const nlohmann::json& initial_state, const SolverParams& initial_params,
                        const StatefulExecutor& execute, const LogClassifier& classifier,
                        CheckpointStore* store, RetryOptions options = {});

}  // namespace aeroforge::recovery
