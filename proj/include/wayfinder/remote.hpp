#pragma once

#include <memory>

#include "wayfinder/llm.hpp"
#include "wayfinder/oracles.hpp"

namespace wayfinder {

class RemotePlanner final : public Planner {
 public:
  explicit RemotePlanner(std::shared_ptr<LlmSession> s) : s_(std::move(s)) {}
  Plan decompose(const Task& task, const Observation& initial, const std::string& demonstrations) override;
  std::deque<Subtask> refine(const Task& task, std::span<const Subtask> remaining, const Completeness& completeness,
                             const Observation& current) override;

 private:
  std::shared_ptr<LlmSession> s_;
};

class RemoteExplorer final : public Explorer {
 public:
  explicit RemoteExplorer(std::shared_ptr<LlmSession> s) : s_(std::move(s)) {}
  Proposal propose(const ProposalRequest& request) override;
  Effect assess_effect(const Observation& before, const Observation& after, const Intent& intent) override;
  Reflections reflect(const ReflectionRequest& request) override;
  std::string reflect_simulation(const ReflectionRequest& request) override;

 private:
  std::shared_ptr<LlmSession> s_;
};

class RemoteAppraiser final : public Appraiser {
 public:
  explicit RemoteAppraiser(std::shared_ptr<LlmSession> s) : s_(std::move(s)) {}
  Appraisal score(const AppraisalRequest& request) override;

 private:
  std::shared_ptr<LlmSession> s_;
};

class RemoteController final : public Controller {
 public:
  explicit RemoteController(std::shared_ptr<LlmSession> s) : s_(std::move(s)) {}
  ContinuationDecision decide(const Subtask& subtask, std::span<const Action> history,
                              const Observation& observation) override;
  CompletenessVerdict assess(const Subtask& subtask, std::span<const Action> history,
                             const Observation& observation) override;

 private:
  std::shared_ptr<LlmSession> s_;
};

/// Rejects structurally bad actions locally before asking the model.
class RemoteVerifier final : public Verifier {
 public:
  explicit RemoteVerifier(std::shared_ptr<LlmSession> s) : s_(std::move(s)) {}
  Verdict check(const Action& action, std::span<const Action> siblings, const Observation& observation) override;

 private:
  std::shared_ptr<LlmSession> s_;
};

class RemoteExtractor final : public Extractor {
 public:
  explicit RemoteExtractor(std::shared_ptr<LlmSession> s) : s_(std::move(s)) {}
  ExtractorStep step(const Subtask& subtask, const Observation& observation) override;

 private:
  std::shared_ptr<LlmSession> s_;
};

OracleSuite make_remote_suite(std::shared_ptr<LlmSession> session);

}  // namespace wayfinder
