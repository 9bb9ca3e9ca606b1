#include "aeroforge/recovery.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "aeroforge/gzipio.hpp"
#include "aeroforge/md5.hpp"
#include "aeroforge/scheduler.hpp"
#include "aeroforge/util.hpp"

namespace aeroforge::recovery {

namespace fs = std::filesystem;
using nlohmann::json;

std::string error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kMeshConversionFailure: return "MeshConversionFailure";
    case ErrorKind::kSolverDivergence: return "SolverDivergence";
    case ErrorKind::kBoundaryConditionError: return "BoundaryConditionError";
    case ErrorKind::kResourceExhaustion: return "ResourceExhaustion";
    case ErrorKind::kUnknown: return "Unknown";
  }
  throw std::logic_error("unknown error kind");
}

ErrorKind error_kind_from_name(const std::string& s) {
  if (s == "MeshConversionFailure") return ErrorKind::kMeshConversionFailure;
  if (s == "SolverDivergence") return ErrorKind::kSolverDivergence;
  if (s == "BoundaryConditionError") return ErrorKind::kBoundaryConditionError;
  if (s == "ResourceExhaustion") return ErrorKind::kResourceExhaustion;
  if (s == "Unknown") return ErrorKind::kUnknown;
  throw RecoveryError("unknown error kind: " + s);
}

LogClassifier LogClassifier::from_file(const fs::path& rules_json) {
  return from_json(json::parse(util::read_file(rules_json)));
}

LogClassifier LogClassifier::from_json(const json& rules) {
  LogClassifier c;
  if (!rules.is_object() || !rules.contains("rules") || !rules["rules"].is_array())
    throw RecoveryError("rule table must be an object with a 'rules' array");
  for (const auto& r : rules["rules"]) {
    Rule rule{error_kind_from_name(r.at("kind").get<std::string>()),
              std::regex(r.at("pattern").get<std::string>(),
                         std::regex::icase | std::regex::ECMAScript),
              r.at("pattern").get<std::string>()};
    c.rules_.push_back(std::move(rule));
  }
  return c;
}

ErrorClass LogClassifier::classify(const std::string& logs) const {
  auto lines = util::split(logs, '\n');
  for (const auto& rule : rules_) {
    std::vector<std::string> evidence;
    for (const auto& line : lines)
      if (std::regex_search(line, rule.pattern)) evidence.push_back(line);
    if (!evidence.empty()) return {rule.kind, std::move(evidence)};
  }
  return {ErrorKind::kUnknown, {}};
}

namespace {
double clamp_unit(double v) { return std::clamp(v, 0.01, 1.0); }
}  // namespace

RecoveryStrategy strategy_for(const ErrorClass& error, int attempt, const SolverParams& current) {
  if (attempt < 1) throw RecoveryError("attempt must be >= 1");
  RecoveryStrategy s;
  s.params = current;
  switch (error.kind) {
    case ErrorKind::kMeshConversionFailure:
      s.action = "regenerate_mesh";
      s.params.refinement_scale = clamp_unit(current.refinement_scale * 0.8);
      break;
    case ErrorKind::kSolverDivergence:
      s.action = "adjust_relaxation";
      if (attempt == 1) {
        s.params.relaxation_pressure = 0.3;
        s.params.relaxation_velocity = 0.2;
      } else {
        // tighten further on repeat attempts
        s.params.relaxation_pressure = clamp_unit(current.relaxation_pressure * 0.8);
        s.params.relaxation_velocity = clamp_unit(current.relaxation_velocity * 0.8);
      }
      s.params.time_step_scale = clamp_unit(current.time_step_scale * 0.5);
      break;
    case ErrorKind::kBoundaryConditionError:
      s.action = "correct_patches";
      s.params.patch_type_remap = {{"walls", "wall"}, {"front", "empty"}, {"back", "empty"}};
      break;
    case ErrorKind::kResourceExhaustion:
    case ErrorKind::kUnknown:
      s.action = "default_recovery";
      s.params.cleanup_requested = true;
      break;
  }
  return s;
}

void to_json(json& j, const SolverParams& p) {
  j = json{{"refinement_scale", p.refinement_scale},
           {"relaxation_pressure", p.relaxation_pressure},
           {"relaxation_velocity", p.relaxation_velocity},
           {"time_step_scale", p.time_step_scale},
           {"patch_type_remap", p.patch_type_remap},
           {"cleanup_requested", p.cleanup_requested}};
}

void from_json(const json& j, SolverParams& p) {
  j.at("refinement_scale").get_to(p.refinement_scale);
  j.at("relaxation_pressure").get_to(p.relaxation_pressure);
  j.at("relaxation_velocity").get_to(p.relaxation_velocity);
  j.at("time_step_scale").get_to(p.time_step_scale);
  j.at("patch_type_remap").get_to(p.patch_type_remap);
  j.at("cleanup_requested").get_to(p.cleanup_requested);
}

// ---- checkpoint store ----

CheckpointStore::CheckpointStore(fs::path dir, std::size_t window)
    : dir_(std::move(dir)), window_(window) {
  if (window_ < 1) throw RecoveryError("checkpoint window must be >= 1");
  fs::create_directories(dir_);
}

std::vector<Checkpoint> CheckpointStore::list() const {
  std::vector<fs::path> metas;
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.is_regular_file() && e.path().extension() == ".meta") metas.push_back(e.path());
  std::sort(metas.begin(), metas.end());
  std::vector<Checkpoint> out;
  for (const auto& m : metas) {
    try {
      json j = json::parse(util::read_file(m));
      Checkpoint cp;
      cp.checkpoint_id = j.at("checkpoint_id").get<std::string>();
      cp.phase = j.at("phase").get<std::string>();
      cp.progress_percent = j.at("progress_percent").get<double>();
      cp.digest = j.at("md5").get<std::string>();
      cp.timestamp = j.at("timestamp").get<std::string>();
      out.push_back(std::move(cp));
    } catch (const std::exception&) {
      // unreadable sidecar: not a valid checkpoint
    }
  }
  return out;
}

Checkpoint CheckpointStore::save(const std::string& phase, double progress_percent,
                                 const json& state) {
  // next id continues after whatever is already on disk
  std::size_t next = 1;
  for (const auto& cp : list()) {
    std::size_t n = std::strtoull(cp.checkpoint_id.c_str() + 3, nullptr, 10);
    next = std::max(next, n + 1);
  }
  char idbuf[16];
  std::snprintf(idbuf, sizeof(idbuf), "cp_%06zu", next);
  Checkpoint cp;
  cp.checkpoint_id = idbuf;
  cp.phase = phase;
  cp.progress_percent = progress_percent;
  cp.timestamp = util::utc_timestamp();

  std::string blob;
  try {
    blob = util::gzip_compress(state.dump());
  } catch (const std::exception& e) {
    throw RecoveryError(std::string("checkpoint serialization failed: ") + e.what());
  }
  cp.digest = util::Md5::hex(blob);

  try {
    fs::path tmp = dir_ / (cp.checkpoint_id + std::string(".tmp"));
    util::write_file(tmp, blob);
    fs::rename(tmp, dir_ / (cp.checkpoint_id + std::string(".state.gz")));
    json meta{{"checkpoint_id", cp.checkpoint_id},
              {"phase", cp.phase},
              {"progress_percent", cp.progress_percent},
              {"md5", cp.digest},
              {"timestamp", cp.timestamp}};
    util::write_file(dir_ / (cp.checkpoint_id + std::string(".meta")), meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    // disk pressure surfaces as a resource problem for the recovery switch
    throw ResourceExhaustionError(std::string("checkpoint write failed: ") + e.what());
  }

  // prune beyond the sliding window, oldest first
  auto all = list();
  while (all.size() > window_) {
    fs::remove(dir_ / (all.front().checkpoint_id + std::string(".state.gz")));
    fs::remove(dir_ / (all.front().checkpoint_id + std::string(".meta")));
    all.erase(all.begin());
  }
  return cp;
}

json CheckpointStore::restore(const Checkpoint& cp) const {
  fs::path blob_path = dir_ / (cp.checkpoint_id + std::string(".state.gz"));
  if (!fs::exists(blob_path))
    throw CheckpointCorruptError("checkpoint blob missing: " + cp.checkpoint_id);
  std::string blob = util::read_file(blob_path);
  if (util::Md5::hex(blob) != cp.digest)
    throw CheckpointCorruptError("checkpoint digest mismatch: " + cp.checkpoint_id);
  try {
    return json::parse(util::gzip_decompress(blob));
  } catch (const std::exception& e) {
    throw CheckpointCorruptError(std::string("checkpoint unreadable: ") + e.what());
  }
}

std::optional<std::pair<Checkpoint, json>> CheckpointStore::restore_latest_valid() const {
  auto all = list();
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    try {
      return std::make_pair(*it, restore(*it));
    } catch (const CheckpointCorruptError&) {
      // keep walking toward older checkpoints
    }
  }
  return std::nullopt;
}

// ---- retry loop ----

RetryOutcome retry_loop(const json& initial_state, const SolverParams& initial_params,
                        const StatefulExecutor& execute, const LogClassifier& classifier,
                        CheckpointStore* store, RetryOptions options) {
  if (!options.wait_seconds)
    options.wait_seconds = [](int s) { std::this_thread::sleep_for(std::chrono::seconds(s)); };
  if (!options.validate_integrity) options.validate_integrity = [](const json&) { return true; };

  RetryOutcome out;
  out.final_params = initial_params;

  json state = initial_state;
  if (store) {
    if (auto latest = store->restore_latest_valid()) state = latest->second;
  }
  json rollback_state = state;

  for (int attempt = 1; attempt <= options.max_retries; ++attempt) {
    out.attempts = attempt;
    try {
      json result = execute(state, out.final_params);
      if (options.validate_integrity(result)) {
        out.success = true;
        out.final_state = result;
        return out;
      }
      // a result that fails validation counts as a failed attempt
      ErrorClass ec{ErrorKind::kUnknown, {"integrity validation failed"}};
      out.last_error = ec.kind;
      out.final_params = strategy_for(ec, attempt, out.final_params).params;
    } catch (const scheduler::TaskExecutionError& e) {
      ErrorClass ec = classifier.classify(e.logs);
      out.last_error = ec.kind;
      out.final_params = strategy_for(ec, attempt, out.final_params).params;
    } catch (const std::exception& e) {
      ErrorClass ec = classifier.classify(e.what());
      out.last_error = ec.kind;
      out.final_params = strategy_for(ec, attempt, out.final_params).params;
    }

    if (attempt < options.max_retries) {
      // roll back to the last known-good state before trying again
      if (store) {
        if (auto latest = store->restore_latest_valid()) rollback_state = latest->second;
      }
      state = rollback_state;
      int wait = 1 << attempt;
      out.waits_s.push_back(wait);
      options.wait_seconds(wait);
    }
  }
  out.final_state = state;
  return out;
}

}  // namespace aeroforge::recovery
