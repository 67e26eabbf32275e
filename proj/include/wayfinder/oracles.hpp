#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wayfinder/model.hpp"

namespace wayfinder {

/// Everything the Explorer sees when asked for the next action.
struct ProposalRequest {
  const Observation& observation;
  const Subtask& subtask;
  std::span<const Action> history;  // root-to-frontier actions
  const ReflectionBundle& reflections;
  const std::optional<std::string>& continuation;  // latest Controller reason
  std::span<const std::string> rejections;         // Verifier feedback this round
  int expansion_index = 0;                         // expansions already spent in this search
  bool simulation = false;                         // one-step lookahead rather than a real expansion
};

struct Proposal {
  Action action;
  Intent intent;
};

struct ReflectionRequest {
  const Effect& effect;
  const Subtask& subtask;
  const Action& action;
  const Intent& intent;
  const Observation& before;
  const Observation& after;
  std::span<const Action> history;  // actions before `action`
};

struct Reflections {
  std::string child;
  std::string sibling;
};

struct AppraisalRequest {
  const Effect& effect;
  const Action& action;
  const Observation& before;
  const Observation& after;
  const Subtask& subtask;
};

struct Appraisal {
  int s_eff = 0;
  int s_fut = 0;
};

struct Verdict {
  bool accept = true;
  std::string reason;

  static Verdict accepted() { return {true, {}}; }
  static Verdict rejected(std::string why) { return {false, std::move(why)}; }
};

struct ExtractorStep {
  std::optional<std::string> answer;
  ScrollDirection scroll = ScrollDirection::Down;  // used when no answer
};

struct CompletenessVerdict {
  Completeness completeness;
  std::optional<std::string> subtask_reflection;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual Plan decompose(const Task& task, const Observation& initial, const std::string& demonstrations) = 0;
  /// Returns a full replacement for the remaining plan.
  virtual std::deque<Subtask> refine(const Task& task, std::span<const Subtask> remaining,
                                     const Completeness& completeness, const Observation& current) = 0;
};

class Explorer {
 public:
  virtual ~Explorer() = default;
  virtual Proposal propose(const ProposalRequest& request) = 0;
  virtual Effect assess_effect(const Observation& before, const Observation& after, const Intent& intent) = 0;
  virtual Reflections reflect(const ReflectionRequest& request) = 0;
  /// Reflection distilled from a one-step simulation that is not kept in the tree.
  virtual std::string reflect_simulation(const ReflectionRequest& request) = 0;
};

class Appraiser {
 public:
  virtual ~Appraiser() = default;
  virtual Appraisal score(const AppraisalRequest& request) = 0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ContinuationDecision decide(const Subtask& subtask, std::span<const Action> history,
                                      const Observation& observation) = 0;
  virtual CompletenessVerdict assess(const Subtask& subtask, std::span<const Action> history,
                                     const Observation& observation) = 0;
};

class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual Verdict check(const Action& action, std::span<const Action> siblings, const Observation& observation) = 0;
};

class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual ExtractorStep step(const Subtask& subtask, const Observation& observation) = 0;
};

/// One implementation per role; scripted and remote roles may be mixed.
struct OracleSuite {
  std::shared_ptr<Planner> planner;
  std::shared_ptr<Explorer> explorer;
  std::shared_ptr<Appraiser> appraiser;
  std::shared_ptr<Controller> controller;
  std::shared_ptr<Verifier> verifier;
  std::shared_ptr<Extractor> extractor;

  /// Throws ConfigError naming the first missing role.
  void require_complete() const;
};

/// Structural action check shared by every Verifier: grammar-level
/// uniqueness among siblings and applicability in the observation.
Verdict structural_check(const Action& action, std::span<const Action> siblings, const Observation& observation);

/// Deterministic Verifier built on `structural_check`.
class RuleVerifier final : public Verifier {
 public:
  Verdict check(const Action& action, std::span<const Action> siblings, const Observation& observation) override {
    return structural_check(action, siblings, observation);
  }
};

}  // namespace wayfinder
