#include "wayfinder/remote.hpp"

#include <algorithm>
#include <cctype>

#include "wayfinder/environment.hpp"
#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

using Values = std::vector<std::pair<std::string, std::string>>;

std::string history_text(std::span<const Action> history) {
  if (history.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1) + ". " + serialize_action(history[i]) + "\n";
  }
  out.pop_back();
  return out;
}

std::string reflections_text(const ReflectionBundle& r) {
  auto line = [](const char* name, const std::optional<std::string>& v) {
    return std::string(name) + ": " + (v ? *v : "(none)") + "\n";
  };
  std::string out = line("parent", r.parent) + line("sibling", r.sibling) + line("simulation", r.simulation) +
                    line("subtask", r.subtask);
  out.pop_back();
  return out;
}

bool yes(std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return v == "yes" || v == "true" || v == "1" || v == "stop" || v == "complete" || v == "accept";
}

int score_of(const TaggedFields& f, const std::string& tag) {
  const std::string v = *tag_value(f, tag);
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedResponse, "<" + tag + "> is not an integer: '" + v + "'");
  }
}

std::string nonempty(std::string v, const std::string& tag) {
  if (v.empty()) throw Error(ErrorCode::MalformedResponse, "<" + tag + "> is empty");
  return v;
}

std::deque<Subtask> subtasks_of(const TaggedFields& fields) {
  std::deque<Subtask> out;
  for (const auto& [tag, value] : fields) {
    if (tag == "subtask") {
      out.push_back(Subtask{nonempty(value, tag), value, SubtaskKind::Interaction});
    } else if (out.empty()) {
      continue;
    } else if (tag == "objective") {
      out.back().objective = value;
    } else if (tag == "kind") {
      try {
        out.back().kind = parse_subtask_kind(value);
      } catch (const Error&) {
        throw Error(ErrorCode::MalformedResponse, "unknown subtask kind '" + value + "'");
      }
    }
  }
  return out;
}

std::string subtask_listing(std::span<const Subtask> list) {
  if (list.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    out += std::to_string(i + 1) + ". [" + std::string(to_string(list[i].kind)) + "] " + list[i].description +
           " | objective: " + list[i].objective + "\n";
  }
  out.pop_back();
  return out;
}

}  // namespace

Plan RemotePlanner::decompose(const Task& task, const Observation& initial, const std::string& demonstrations) {
  auto f = s_->ask("planner", "planner_decompose",
                   {{"task", task.goal}, {"observation", initial.actree}, {"demonstrations", demonstrations}},
                   {"subtask"});
  Plan plan;
  plan.pending = subtasks_of(f);
  return plan;
}

std::deque<Subtask> RemotePlanner::refine(const Task& task, std::span<const Subtask> remaining,
                                          const Completeness& completeness, const Observation& current) {
  auto f = s_->ask("planner", "planner_refine",
                   {{"task", task.goal},
                    {"remaining", subtask_listing(remaining)},
                    {"completeness", completeness.assessment},
                    {"observation", current.actree}},
                   {"plan_status"});
  return subtasks_of(f);
}

Proposal RemoteExplorer::propose(const ProposalRequest& req) {
  std::string rejections;
  for (const auto& r : req.rejections) rejections += r + "\n";
  if (rejections.empty()) rejections = "(none)";
  auto f = s_->ask("explorer", req.simulation ? "explorer_simulate_propose" : "explorer_propose",
                   {{"subtask", req.subtask.description},
                    {"objective", req.subtask.objective},
                    {"observation", req.observation.actree},
                    {"history", history_text(req.history)},
                    {"reflections", reflections_text(req.reflections)},
                    {"continuation", req.continuation.value_or("(none)")},
                    {"rejections", rejections}},
                   {"action", "intent"});
  Action action;
  try {
    action = parse_action(*tag_value(f, "action"));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("<action> does not parse: ") + e.what());
  }
  return {std::move(action), Intent{nonempty(*tag_value(f, "intent"), "intent")}};
}

Effect RemoteExplorer::assess_effect(const Observation& before, const Observation& after, const Intent& intent) {
  Effect effect = diff_observations(before, after, intent);
  auto f = s_->ask("explorer", "explorer_effect",
                   {{"intent", intent.text}, {"effect", effect.description}, {"observation", after.actree}},
                   {"observation_description", "intent_achieved"});
  effect.description = nonempty(*tag_value(f, "observation_description"), "observation_description");
  effect.intent_achieved = yes(*tag_value(f, "intent_achieved"));
  return effect;
}

Reflections RemoteExplorer::reflect(const ReflectionRequest& req) {
  auto f = s_->ask("explorer", "explorer_reflect",
                   {{"subtask", req.subtask.description},
                    {"objective", req.subtask.objective},
                    {"action", serialize_action(req.action)},
                    {"intent", req.intent.text},
                    {"effect", req.effect.description},
                    {"observation", req.after.actree},
                    {"history", history_text(req.history)}},
                   {"reflection_for_child", "reflection_for_sib"});
  return {nonempty(*tag_value(f, "reflection_for_child"), "reflection_for_child"),
          nonempty(*tag_value(f, "reflection_for_sib"), "reflection_for_sib")};
}

std::string RemoteExplorer::reflect_simulation(const ReflectionRequest& req) {
  auto f = s_->ask("explorer", "explorer_simulate",
                   {{"subtask", req.subtask.description},
                    {"objective", req.subtask.objective},
                    {"action", serialize_action(req.action)},
                    {"intent", req.intent.text},
                    {"effect", req.effect.description},
                    {"observation", req.after.actree}},
                   {"simulation_reflection"});
  return nonempty(*tag_value(f, "simulation_reflection"), "simulation_reflection");
}

Appraisal RemoteAppraiser::score(const AppraisalRequest& req) {
  auto f = s_->ask("appraiser", "appraiser_score",
                   {{"subtask", req.subtask.description},
                    {"objective", req.subtask.objective},
                    {"action", serialize_action(req.action)},
                    {"effect", req.effect.description},
                    {"observation", req.after.actree}},
                   {"executed_action_effectiveness", "future_promise"});
  return {score_of(f, "executed_action_effectiveness"), score_of(f, "future_promise")};
}

ContinuationDecision RemoteController::decide(const Subtask& subtask, std::span<const Action> history,
                                              const Observation& observation) {
  auto f = s_->ask("controller", "controller_decide",
                   {{"subtask", subtask.description},
                    {"objective", subtask.objective},
                    {"history", history_text(history)},
                    {"observation", observation.actree}},
                   {"stop", "continuation_reason"});
  return {yes(*tag_value(f, "stop")), *tag_value(f, "continuation_reason")};
}

CompletenessVerdict RemoteController::assess(const Subtask& subtask, std::span<const Action> history,
                                             const Observation& observation) {
  auto f = s_->ask("controller", "controller_assess",
                   {{"subtask", subtask.description},
                    {"objective", subtask.objective},
                    {"history", history_text(history)},
                    {"observation", observation.actree}},
                   {"complete", "task_completeness"});
  CompletenessVerdict v;
  v.completeness = {yes(*tag_value(f, "complete")), nonempty(*tag_value(f, "task_completeness"), "task_completeness")};
  if (auto r = tag_value(f, "subtask_reflection"); r && !r->empty()) v.subtask_reflection = *r;
  return v;
}

Verdict RemoteVerifier::check(const Action& action, std::span<const Action> siblings, const Observation& observation) {
  Verdict local = structural_check(action, siblings, observation);
  if (!local.accept) return local;
  std::string sib;
  for (const auto& a : siblings) sib += serialize_action(a) + "\n";
  if (sib.empty()) sib = "(none)";
  auto f = s_->ask("verifier", "verifier_check",
                   {{"action", serialize_action(action)}, {"siblings", sib}, {"observation", observation.actree}},
                   {"verdict", "reason"});
  if (yes(*tag_value(f, "verdict"))) return Verdict::accepted();
  return Verdict::rejected(nonempty(*tag_value(f, "reason"), "reason"));
}

ExtractorStep RemoteExtractor::step(const Subtask& subtask, const Observation& observation) {
  auto f = s_->ask("extractor", "extractor_step",
                   {{"subtask", subtask.description},
                    {"objective", subtask.objective},
                    {"observation", observation.actree}},
                   {"answer"});
  ExtractorStep out;
  const std::string answer = *tag_value(f, "answer");
  std::string low = answer;
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (!answer.empty() && low != "none" && low != "n/a") out.answer = answer;
  if (auto dir = tag_value(f, "scroll"); dir && *dir == "up") out.scroll = ScrollDirection::Up;
  return out;
}

OracleSuite make_remote_suite(std::shared_ptr<LlmSession> session) {
  OracleSuite s;
  s.planner = std::make_shared<RemotePlanner>(session);
  s.explorer = std::make_shared<RemoteExplorer>(session);
  s.appraiser = std::make_shared<RemoteAppraiser>(session);
  s.controller = std::make_shared<RemoteController>(session);
  s.verifier = std::make_shared<RemoteVerifier>(session);
  s.extractor = std::make_shared<RemoteExtractor>(session);
  return s;
}

}  // namespace wayfinder
