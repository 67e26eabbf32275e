#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wayfinder/config.hpp"
#include "wayfinder/environment.hpp"
#include "wayfinder/local_optimizer.hpp"
#include "wayfinder/oracles.hpp"
#include "wayfinder/trace.hpp"

namespace wayfinder {

struct ExtractionResult {
  std::optional<std::string> answer;
  int scrolls_used = 0;
  std::vector<Action> actions;
  std::vector<EnvSnapshot> states;
  EnvSnapshot final_snapshot;
  Observation final_observation;
};

/// One attempt at a subtask.
struct AttemptRecord {
  std::optional<std::string> subtask_reflection_in;
  std::string root_actree;
  int expansions = 0;
  Completeness completeness;
};

struct SubtaskRecord {
  Subtask subtask;
  int attempts = 0;
  Completeness completeness;
  std::vector<AttemptRecord> history;
};

struct RunResult {
  bool success = false;
  std::optional<std::string> answer;
  std::vector<SubtaskRecord> subtask_log;
  int total_expansions = 0;
  std::string trace_ref;
  bool aborted = false;
  std::vector<Action> actions;  // committed trajectory
  std::vector<EnvSnapshot> states;
};

/// Plans a task, dispatches each subtask to tree search or the extraction
/// loop, and retries or refines according to the Controller's verdicts.
class GlobalOptimizer {
 public:
  GlobalOptimizer(const Environment& env, OracleSuite& oracles, const SearchConfig& cfg, Tracer& tracer);

  /// Throws PlannerError for an empty plan.
  Plan decompose(const Task& task, const Observation& initial, const std::string& demonstrations);

  ExtractionResult run_extraction(const Subtask& subtask, const EnvSnapshot& snapshot, const Observation& observation);

  RunResult run_task(const TaskSpec& task, const std::string& demonstrations);

 private:
  const Environment& env_;
  OracleSuite& oracles_;
  const SearchConfig& cfg_;
  Tracer& tracer_;
};

}  // namespace wayfinder
