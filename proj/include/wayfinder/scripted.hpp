#pragma once

#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wayfinder/environment.hpp"
#include "wayfinder/oracles.hpp"

namespace wayfinder {

/// Predicate over a simulator state. Empty fields are not constrained.
struct GoalPredicate {
  std::vector<std::string> pages;    // any of
  VariableMap variables;             // all of
  std::vector<std::string> visible;  // labels that must all be on screen

  bool holds(const EnvState& state, const Observation& observation) const;
};

struct Milestone {
  GoalPredicate done_when;
  std::string todo;
};

/// Per-subtask annotation authored next to a world.
struct SubtaskScript {
  Subtask subtask;
  GoalPredicate goal;
  std::optional<GoalPredicate> stop_when;  // Controller stop test; defaults to the goal
  std::vector<Milestone> milestones;
  std::string extract_pattern;  // ECMAScript regex over visible labels
};

struct ScriptedProposal {
  Action action;
  std::string intent;
};

struct ScriptedRule {
  std::string page;     // page id or "*"
  std::string subtask;  // substring of the subtask description or "*"
  std::vector<ScriptedProposal> propose;
};

struct NoiseEntry {
  std::string subtask;  // substring or "*"
  int expansion = 0;
  ScriptedProposal decoy;
};

/// Deterministic role behaviour for one world.
struct ScriptedPolicy {
  std::map<std::string, std::vector<SubtaskScript>> plans;  // by task id
  std::vector<ScriptedRule> rules;
  std::set<std::string> solution;  // "page:action"
  std::vector<NoiseEntry> noise;
  bool honor_reflections = true;
  bool fallback_any_element = false;

  static ScriptedPolicy from_json(const nlohmann::json& j);

  /// Annotation whose description matches the subtask, if any.
  const SubtaskScript* find(const Subtask& subtask) const;
};

/// Shared context for the scripted roles: the world, a private simulator
/// used for lookahead distances, and the policy.
class ScriptContext {
 public:
  ScriptContext(std::shared_ptr<const WorldSpec> world, ScriptedPolicy policy);

  const WorldSpec& world() const { return *world_; }
  const ScriptedPolicy& policy() const { return policy_; }
  ScriptedPolicy& policy() { return policy_; }
  const Environment& env() const { return env_; }

  /// Page id and state behind an observation.
  EnvState state_of(const Observation& observation) const;

  /// Ranked rule proposals for the page and subtask, in authoring order.
  std::vector<ScriptedProposal> ranked(const std::string& page, const Subtask& subtask) const;

  /// Fewest actions from `state` to one satisfying `goal`, searching at most
  /// `limit` steps. Returns limit + 1 when no goal state is found.
  int goal_distance(const EnvState& state, const GoalPredicate& goal, int limit) const;

 private:
  std::shared_ptr<const WorldSpec> world_;
  ScriptedPolicy policy_;
  Environment env_;
};

class ScriptedPlanner final : public Planner {
 public:
  explicit ScriptedPlanner(std::shared_ptr<const ScriptContext> ctx) : ctx_(std::move(ctx)) {}
  Plan decompose(const Task& task, const Observation& initial, const std::string& demonstrations) override;
  std::deque<Subtask> refine(const Task& task, std::span<const Subtask> remaining, const Completeness& completeness,
                             const Observation& current) override;

 private:
  std::shared_ptr<const ScriptContext> ctx_;
};

class ScriptedExplorer final : public Explorer {
 public:
  explicit ScriptedExplorer(std::shared_ptr<const ScriptContext> ctx) : ctx_(std::move(ctx)) {}
  Proposal propose(const ProposalRequest& request) override;
  Effect assess_effect(const Observation& before, const Observation& after, const Intent& intent) override;
  Reflections reflect(const ReflectionRequest& request) override;
  std::string reflect_simulation(const ReflectionRequest& request) override;

 private:
  std::vector<ScriptedProposal> candidates(const Observation& observation, const Subtask& subtask,
                                          std::span<const Action> taken) const;
  std::shared_ptr<const ScriptContext> ctx_;
};

class ScriptedAppraiser final : public Appraiser {
 public:
  explicit ScriptedAppraiser(std::shared_ptr<const ScriptContext> ctx) : ctx_(std::move(ctx)) {}
  Appraisal score(const AppraisalRequest& request) override;

 private:
  std::shared_ptr<const ScriptContext> ctx_;
};

class ScriptedController final : public Controller {
 public:
  explicit ScriptedController(std::shared_ptr<const ScriptContext> ctx) : ctx_(std::move(ctx)) {}
  ContinuationDecision decide(const Subtask& subtask, std::span<const Action> history,
                              const Observation& observation) override;
  CompletenessVerdict assess(const Subtask& subtask, std::span<const Action> history,
                             const Observation& observation) override;

 private:
  std::shared_ptr<const ScriptContext> ctx_;
};

class ScriptedExtractor final : public Extractor {
 public:
  explicit ScriptedExtractor(std::shared_ptr<const ScriptContext> ctx) : ctx_(std::move(ctx)) {}
  ExtractorStep step(const Subtask& subtask, const Observation& observation) override;

 private:
  std::shared_ptr<const ScriptContext> ctx_;
};

/// All six roles backed by one context; the Verifier is the rule verifier.
OracleSuite make_scripted_suite(std::shared_ptr<const ScriptContext> ctx);
OracleSuite make_scripted_suite(std::shared_ptr<const WorldSpec> world);

/// Actions named in reflection text, by leading verb ("next, do", "recommend", "avoid").
std::vector<Action> actions_after(const std::string& text, const std::string& verb);

}  // namespace wayfinder
