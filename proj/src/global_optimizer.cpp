#include "wayfinder/global_optimizer.hpp"

#include "oracle_call.hpp"
#include "wayfinder/error.hpp"

namespace wayfinder {

using detail::call_oracle;
using nlohmann::json;

namespace {

json subtask_json(const Subtask& s) {
  return {{"description", s.description}, {"objective", s.objective}, {"kind", to_string(s.kind)}};
}

template <typename Range>
json subtasks_json(const Range& list) {
  json out = json::array();
  for (const auto& s : list) out.push_back(subtask_json(s));
  return out;
}

json opt_text(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

GlobalOptimizer::GlobalOptimizer(const Environment& env, OracleSuite& oracles, const SearchConfig& cfg,
                                 Tracer& tracer)
    : env_(env), oracles_(oracles), cfg_(cfg), tracer_(tracer) {
  oracles_.require_complete();
  cfg_.validate();
}

Plan GlobalOptimizer::decompose(const Task& task, const Observation& initial, const std::string& demonstrations) {
  Plan plan = call_oracle("planner", [&] { return oracles_.planner->decompose(task, initial, demonstrations); });
  if (plan.pending.empty()) throw Error(ErrorCode::PlannerError, "planner returned an empty plan");
  for (const auto& s : plan.pending) {
    if (s.description.empty()) throw Error(ErrorCode::PlannerError, "planner returned a subtask without description");
  }
  tracer_.emit(EventKind::PlanGenerated, {{"task", task.id}, {"subtasks", subtasks_json(plan.pending)}});
  return plan;
}

ExtractionResult GlobalOptimizer::run_extraction(const Subtask& subtask, const EnvSnapshot& snapshot,
                                                 const Observation& observation) {
  ExtractionResult r;
  r.final_snapshot = env_.restore(snapshot);
  r.final_observation = observation;
  while (true) {
    ExtractorStep step =
        call_oracle("extractor", [&] { return oracles_.extractor->step(subtask, r.final_observation); });
    tracer_.emit(EventKind::ExtractionStep, {{"window", r.final_observation.window},
                                             {"scrolls_used", r.scrolls_used},
                                             {"answer", opt_text(step.answer)},
                                             {"scroll", step.answer ? json(nullptr) : json(to_string(step.scroll))}});
    if (step.answer) {
      r.answer = std::move(step.answer);
      return r;
    }
    if (r.scrolls_used >= cfg_.n_scroll_max) return r;
    const Action a = Action::scroll(step.scroll);
    Step next = env_.apply(r.final_snapshot, a);
    r.actions.push_back(a);
    r.states.push_back(next.snapshot);
    r.final_snapshot = std::move(next.snapshot);
    r.final_observation = std::move(next.observation);
    ++r.scrolls_used;
  }
}

RunResult GlobalOptimizer::run_task(const TaskSpec& spec, const std::string& demonstrations) {
  const Task& task = spec.task;
  RunResult result;
  result.trace_ref = tracer_.run_id();
  Step checkpoint = env_.reset();
  Plan plan = decompose(task, checkpoint.observation, demonstrations);
  LocalOptimizer local(env_, oracles_, cfg_, tracer_);

  while (!plan.pending.empty()) {
    Subtask subtask = plan.pending.front();
    plan.pending.pop_front();
    SubtaskRecord record{subtask, 0, {}, {}};
    std::optional<std::string> r_sub;
    bool complete = false;

    while (!complete && record.attempts < cfg_.max_subtask_attempts) {
      ++record.attempts;
      AttemptRecord attempt{r_sub, checkpoint.observation.actree, 0, {}};
      tracer_.emit(EventKind::SubtaskStart, {{"subtask", subtask_json(subtask)},
                                             {"attempt", record.attempts},
                                             {"root_url", checkpoint.observation.base_url},
                                             {"root_hash", sha256_hex(checkpoint.observation.actree)},
                                             {"subtask_reflection", opt_text(r_sub)}});
      std::vector<Action> actions;
      std::vector<EnvSnapshot> states;
      Step end{checkpoint.snapshot, checkpoint.observation};
      CompletenessVerdict verdict;
      json extra;
      if (subtask.kind == SubtaskKind::Interaction) {
        SubtaskOutcome out = local.run_subtask(subtask, checkpoint.snapshot, checkpoint.observation, r_sub);
        attempt.expansions = out.expansions_used;
        result.total_expansions += out.expansions_used;
        actions = out.best_path;
        states = out.path_states;
        end = Step{out.final_snapshot, out.final_observation};
        verdict = call_oracle("controller", [&] { return oracles_.controller->assess(subtask, actions, end.observation); });
        extra = {{"status", to_string(out.status)}, {"expansions", out.expansions_used}, {"nodes", out.tree.size()}};
      } else {
        ExtractionResult ex = run_extraction(subtask, checkpoint.snapshot, checkpoint.observation);
        actions = std::move(ex.actions);
        states = std::move(ex.states);
        end = Step{ex.final_snapshot, ex.final_observation};
        verdict.completeness.complete = ex.answer.has_value();
        verdict.completeness.assessment = ex.answer ? "The requested information was found: " + *ex.answer
                                                    : "The requested information was not found.";
        if (ex.answer) result.answer = ex.answer;
        extra = {{"status", ex.answer ? "Answered" : "NoAnswer"}, {"scrolls_used", ex.scrolls_used},
                 {"answer", opt_text(ex.answer)}};
      }
      if (verdict.completeness.assessment.empty()) {
        throw OracleError("controller", ErrorCode::MalformedResponse, "completeness assessment is empty");
      }
      complete = verdict.completeness.complete;
      attempt.completeness = verdict.completeness;
      record.completeness = verdict.completeness;
      record.history.push_back(attempt);

      std::optional<std::string> next_r_sub;
      if (!complete && subtask.kind == SubtaskKind::Interaction) {
        if (!verdict.subtask_reflection || verdict.subtask_reflection->empty()) {
          throw OracleError("controller", ErrorCode::MalformedResponse, "incomplete verdict without a subtask reflection");
        }
        next_r_sub = verdict.subtask_reflection;
      }
      json payload{{"subtask", subtask.description},
                   {"attempt", record.attempts},
                   {"actions", json::array()},
                   {"complete", complete},
                   {"assessment", verdict.completeness.assessment},
                   {"subtask_reflection", opt_text(next_r_sub)}};
      for (const auto& a : actions) payload["actions"].push_back(serialize_action(a));
      payload.update(extra);
      tracer_.emit(EventKind::SubtaskEnd, payload);

      if (complete) {
        result.actions.insert(result.actions.end(), actions.begin(), actions.end());
        result.states.insert(result.states.end(), states.begin(), states.end());
        checkpoint = std::move(end);
      } else if (subtask.kind == SubtaskKind::Extraction) {
        break;
      } else {
        r_sub = std::move(next_r_sub);
      }
    }

    const Completeness completeness = record.completeness;
    result.subtask_log.push_back(std::move(record));
    if (complete) plan.completed.push_back(subtask);
    if (!complete && cfg_.failure_policy == FailurePolicy::Abort) {
      result.aborted = true;
      break;
    }
    if (!plan.pending.empty()) {
      const std::vector<Subtask> remaining(plan.pending.begin(), plan.pending.end());
      plan.pending = call_oracle("planner", [&] {
        return oracles_.planner->refine(task, remaining, completeness, checkpoint.observation);
      });
      tracer_.emit(EventKind::PlanRefined,
                   {{"before", subtasks_json(remaining)}, {"after", subtasks_json(plan.pending)}});
    }
  }

  result.success = evaluate(spec, result.actions, result.states, result.answer);
  tracer_.emit(EventKind::Eval, {{"task", task.id},
                                 {"success", result.success},
                                 {"answer", opt_text(result.answer)},
                                 {"actions", result.actions.size()},
                                 {"expansions", result.total_expansions},
                                 {"aborted", result.aborted}});
  return result;
}

}  // namespace wayfinder
