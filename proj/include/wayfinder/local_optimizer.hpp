#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wayfinder/config.hpp"
#include "wayfinder/environment.hpp"
#include "wayfinder/oracles.hpp"
#include "wayfinder/search_tree.hpp"
#include "wayfinder/trace.hpp"

namespace wayfinder {

struct SubtaskOutcome {
  enum class Status { CompletedByController, BudgetExhausted };

  explicit SubtaskOutcome(SearchTree t) : tree(std::move(t)) {}

  Status status = Status::BudgetExhausted;
  std::vector<Action> best_path;
  std::vector<EnvSnapshot> path_states;  // state after each action of best_path
  EnvSnapshot final_snapshot;
  Observation final_observation;
  int expansions_used = 0;
  NodeId final_node = 0;
  SearchTree tree;
};

std::string_view to_string(SubtaskOutcome::Status status);

/// Tree search for one interaction subtask. Owns nothing: the environment,
/// oracles, and tracer are borrowed for the duration of the calls.
class LocalOptimizer {
 public:
  LocalOptimizer(const Environment& env, OracleSuite& oracles, const SearchConfig& cfg, Tracer& tracer);

  /// Runs until the Controller stops the search or the node budget is spent.
  SubtaskOutcome run_subtask(const Subtask& subtask, const EnvSnapshot& root_snapshot,
                             const Observation& root_observation,
                             const std::optional<std::string>& subtask_reflection);

  /// Proposes, verifies, executes, reflects on and scores one new child of
  /// `frontier`. Throws VerifierExhausted when no valid, fresh action is found
  /// within branch_limit re-proposals.
  NodeId expand_once(SearchTree& tree, NodeId frontier, const Subtask& subtask, const ReflectionBundle& reflections,
                     const std::optional<ContinuationDecision>& continuation);

  /// Controller verdict for a freshly scored node, followed (when the search
  /// continues) by a one-step simulation whose reflection is stored on the
  /// node. The simulated state never enters the tree.
  std::pair<ContinuationDecision, std::optional<std::string>> evaluate_and_simulate(SearchTree& tree, NodeId node,
                                                                                    const Subtask& subtask);

  /// Reflections offered when expanding at `node`.
  ReflectionBundle reflections_at(const SearchTree& tree, NodeId node) const;

 private:
  Step apply_guarded(const EnvSnapshot& from, const Observation& from_obs, const Action& action,
                     std::optional<std::string>& error) const;

  const Environment& env_;
  OracleSuite& oracles_;
  const SearchConfig& cfg_;
  Tracer& tracer_;
  std::optional<std::string> subtask_reflection_;
};

}  // namespace wayfinder
