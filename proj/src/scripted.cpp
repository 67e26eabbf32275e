#include "wayfinder/scripted.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <regex>
#include <set>

#include "wayfinder/error.hpp"

namespace wayfinder {

using nlohmann::json;

namespace {

const std::string kActionPattern =
    R"((click \[\d+\]|type \[\d+\] \[[^\]\n]*\]|scroll \[(?:up|down)\]|stop \[[^\]\n]*\]))";

GoalPredicate parse_predicate(const json& j) {
  GoalPredicate p;
  if (j.is_null()) return p;
  if (j.contains("pages")) p.pages = j.at("pages").get<std::vector<std::string>>();
  if (j.contains("variables")) p.variables = j.at("variables").get<VariableMap>();
  if (j.contains("visible")) p.visible = j.at("visible").get<std::vector<std::string>>();
  return p;
}

ScriptedProposal parse_proposal(const json& j) {
  return {parse_action(j.at("action").get<std::string>()), j.at("intent").get<std::string>()};
}

bool pattern_matches(const std::string& pattern, const std::string& text) {
  return pattern == "*" || text.find(pattern) != std::string::npos;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool contains_action(const std::vector<Action>& list, const Action& a) {
  return std::find(list.begin(), list.end(), a) != list.end();
}

std::vector<Action> rejected_actions(std::span<const std::string> rejections) {
  std::vector<Action> out;
  for (const auto& r : rejections) {
    auto pos = r.find(": ");
    if (pos == std::string::npos) continue;
    try {
      out.push_back(parse_action(std::string_view(r).substr(pos + 2)));
    } catch (const Error&) {
    }
  }
  return out;
}

void append(std::vector<Action>& into, const std::optional<std::string>& text, const std::string& verb) {
  if (!text) return;
  for (auto& a : actions_after(*text, verb)) into.push_back(std::move(a));
}

const SubtaskScript& require_script(const ScriptContext& ctx, const Subtask& subtask) {
  const SubtaskScript* s = ctx.policy().find(subtask);
  if (!s) throw Error(ErrorCode::ConfigError, "no scripted annotation for subtask '" + subtask.description + "'");
  return *s;
}

}  // namespace

std::vector<Action> actions_after(const std::string& text, const std::string& verb) {
  std::vector<Action> out;
  const std::regex re(verb + " " + kActionPattern);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    try {
      out.push_back(parse_action((*it)[1].str()));
    } catch (const Error&) {
    }
  }
  return out;
}

bool GoalPredicate::holds(const EnvState& state, const Observation& observation) const {
  if (!pages.empty() && std::find(pages.begin(), pages.end(), state.page) == pages.end()) return false;
  for (const auto& [k, v] : variables) {
    auto it = state.variables.find(k);
    if (it == state.variables.end() || it->second != v) return false;
  }
  for (const auto& label : visible) {
    bool seen = std::any_of(observation.elements.begin(), observation.elements.end(),
                            [&](const ElementView& e) { return e.label == label; });
    if (!seen) return false;
  }
  return true;
}

ScriptedPolicy ScriptedPolicy::from_json(const json& j) {
  ScriptedPolicy p;
  if (j.is_null()) return p;
  try {
    if (j.contains("plans")) {
      for (const auto& [task_id, steps] : j.at("plans").items()) {
        auto& list = p.plans[task_id];
        for (const auto& s : steps) {
          SubtaskScript sc;
          sc.subtask.description = s.at("description").get<std::string>();
          sc.subtask.objective = s.value("objective", sc.subtask.description);
          sc.subtask.kind = parse_subtask_kind(s.value("kind", std::string("interaction")));
          sc.goal = parse_predicate(s.value("goal", json()));
          if (s.contains("stop_when")) sc.stop_when = parse_predicate(s.at("stop_when"));
          for (const auto& m : s.value("milestones", json::array())) {
            sc.milestones.push_back({parse_predicate(m.at("done_when")), m.at("todo").get<std::string>()});
          }
          sc.extract_pattern = s.value("extract", std::string());
          list.push_back(std::move(sc));
        }
      }
    }
    for (const auto& r : j.value("rules", json::array())) {
      ScriptedRule rule{r.value("page", std::string("*")), r.value("subtask", std::string("*")), {}};
      for (const auto& prop : r.at("propose")) rule.propose.push_back(parse_proposal(prop));
      p.rules.push_back(std::move(rule));
    }
    for (const auto& s : j.value("solution", json::array())) p.solution.insert(s.get<std::string>());
    for (const auto& n : j.value("noise", json::array())) {
      p.noise.push_back({n.value("subtask", std::string("*")), n.at("expansion").get<int>(), parse_proposal(n)});
    }
    p.honor_reflections = j.value("honor_reflections", true);
    p.fallback_any_element = j.value("fallback_any_element", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad scripted annotations: ") + e.what());
  }
  return p;
}

const SubtaskScript* ScriptedPolicy::find(const Subtask& subtask) const {
  for (const auto& [task_id, list] : plans) {
    for (const auto& s : list) {
      if (s.subtask.description == subtask.description) return &s;
    }
  }
  return nullptr;
}

ScriptContext::ScriptContext(std::shared_ptr<const WorldSpec> world, ScriptedPolicy policy)
    : world_(world), policy_(std::move(policy)), env_(std::move(world)) {}

EnvState ScriptContext::state_of(const Observation& observation) const {
  return decode_state_key(observation.state_key);
}

std::vector<ScriptedProposal> ScriptContext::ranked(const std::string& page, const Subtask& subtask) const {
  std::vector<ScriptedProposal> out;
  for (const auto& rule : policy_.rules) {
    if (rule.page != "*" && rule.page != page) continue;
    if (!pattern_matches(rule.subtask, subtask.description)) continue;
    for (const auto& p : rule.propose) {
      bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.action == p.action; });
      if (!seen) out.push_back(p);
    }
  }
  return out;
}

int ScriptContext::goal_distance(const EnvState& start, const GoalPredicate& goal, int limit) const {
  const EnvSnapshot first = env_.snapshot_of(start);
  std::deque<std::pair<EnvSnapshot, int>> queue{{first, 0}};
  std::set<std::string> seen{encode_state_key(start)};
  while (!queue.empty()) {
    auto [snap, depth] = queue.front();
    queue.pop_front();
    const Observation obs = env_.observe(snap);
    if (goal.holds(snap.state(), obs)) return depth;
    if (depth == limit) continue;
    std::vector<Action> moves{Action::scroll(ScrollDirection::Down), Action::scroll(ScrollDirection::Up)};
    const PageSpec& page = world_->page(snap.state().page);
    for (const auto& view : obs.elements) {
      const ElementSpec* e = page.find(view.id);
      if (e->accepts_text()) {
        for (const auto& text : e->candidates) moves.push_back(Action::type(e->id, text));
      } else if (view.interactive) {
        moves.push_back(Action::click(e->id));
      }
    }
    for (const auto& a : moves) {
      Step next = env_.apply(snap, a);
      if (seen.insert(next.observation.state_key).second) queue.emplace_back(std::move(next.snapshot), depth + 1);
    }
  }
  return limit + 1;
}

Plan ScriptedPlanner::decompose(const Task& task, const Observation&, const std::string&) {
  auto it = ctx_->policy().plans.find(task.id);
  if (it == ctx_->policy().plans.end() || it->second.empty()) {
    throw Error(ErrorCode::PlannerError, "no scripted plan for task '" + task.id + "'");
  }
  Plan plan;
  for (const auto& s : it->second) plan.pending.push_back(s.subtask);
  return plan;
}

std::deque<Subtask> ScriptedPlanner::refine(const Task&, std::span<const Subtask> remaining, const Completeness&,
                                            const Observation& current) {
  const EnvState state = ctx_->state_of(current);
  std::deque<Subtask> out;
  for (const auto& s : remaining) {
    const SubtaskScript* sc = ctx_->policy().find(s);
    bool done = sc && s.kind == SubtaskKind::Interaction && sc->goal.holds(state, current);
    if (!done) out.push_back(s);
  }
  return out;
}

std::vector<ScriptedProposal> ScriptedExplorer::candidates(const Observation& observation, const Subtask& subtask,
                                                           std::span<const Action> taken) const {
  std::vector<ScriptedProposal> out;
  const EnvState state = ctx_->state_of(observation);
  for (auto& p : ctx_->ranked(state.page, subtask)) {
    if (structural_check(p.action, {}, observation).accept) out.push_back(std::move(p));
  }
  if (ctx_->policy().fallback_any_element) {
    const PageSpec& page = ctx_->world().page(state.page);
    for (const auto& view : observation.elements) {
      const ElementSpec* e = page.find(view.id);
      std::optional<Action> a;
      if (e->accepts_text()) {
        if (!e->candidates.empty()) a = Action::type(e->id, e->candidates.front());
      } else if (view.interactive) {
        a = Action::click(e->id);
      }
      if (!a) continue;
      bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.action == *a; });
      if (!seen) out.push_back({*a, "try '" + view.label + "'"});
    }
  }
  // Steps already taken on this path go last.
  std::stable_partition(out.begin(), out.end(), [&](const ScriptedProposal& p) {
    return std::find(taken.begin(), taken.end(), p.action) == taken.end();
  });
  return out;
}

Proposal ScriptedExplorer::propose(const ProposalRequest& req) {
  const auto cands = candidates(req.observation, req.subtask, {});
  if (cands.empty()) {
    throw Error(ErrorCode::NoProposal, "no scripted proposal for page '" + ctx_->state_of(req.observation).page +
                                           "' and subtask '" + req.subtask.description + "'");
  }
  const bool honoring = ctx_->policy().honor_reflections;
  const auto rejected = rejected_actions(req.rejections);
  std::vector<Action> condemned;
  std::vector<Action> known_siblings;
  std::vector<Action> promoted;
  if (honoring) {
    const auto& r = req.reflections;
    append(condemned, r.sibling, "avoid");
    append(condemned, r.simulation, "avoid");
    append(condemned, r.subtask, "avoid");
    append(known_siblings, r.sibling, "continue past");
    append(promoted, r.parent, "next, do");
    append(promoted, r.simulation, "recommend");
  }
  auto usable = [&](const Action& a) {
    return !contains_action(rejected, a) && !contains_action(condemned, a) && !contains_action(known_siblings, a) &&
           structural_check(a, {}, req.observation).accept;
  };
  auto intent_for = [&](const Action& a) {
    for (const auto& c : cands) {
      if (c.action == a) return c.intent;
    }
    return "follow the reflection and " + serialize_action(a);
  };

  if (!req.simulation) {
    for (const auto& n : ctx_->policy().noise) {
      if (n.expansion == req.expansion_index && pattern_matches(n.subtask, req.subtask.description) &&
          usable(n.decoy.action)) {
        return {n.decoy.action, Intent{n.decoy.intent}};
      }
    }
  }
  for (const auto& a : promoted) {
    if (usable(a)) return {a, Intent{intent_for(a)}};
  }
  for (const auto& c : cands) {
    if (usable(c.action)) return {c.action, Intent{c.intent}};
  }
  // Nothing fresh is left: repeat an action the Verifier will turn down.
  if (!rejected.empty()) return {rejected.front(), Intent{intent_for(rejected.front())}};
  if (!known_siblings.empty()) return {known_siblings.front(), Intent{intent_for(known_siblings.front())}};
  for (const auto& a : condemned) {
    if (structural_check(a, {}, req.observation).accept) return {a, Intent{intent_for(a)}};
  }
  return {cands.front().action, Intent{cands.front().intent}};
}

Effect ScriptedExplorer::assess_effect(const Observation& before, const Observation& after, const Intent& intent) {
  Effect effect = diff_observations(before, after, intent);
  if (effect.kind == EffectKind::NoChange) return effect;
  static const std::regex quoted("'([^']+)'");
  std::vector<std::string> targets;
  for (auto it = std::sregex_iterator(intent.text.begin(), intent.text.end(), quoted); it != std::sregex_iterator();
       ++it) {
    targets.push_back(lower((*it)[1].str()));
  }
  if (targets.empty()) {
    effect.intent_achieved = true;
    return effect;
  }
  std::vector<std::string> changed{lower(after.title)};
  if (effect.kind == EffectKind::InPlaceChange) changed.pop_back();
  for (const auto& l : effect.added_labels) changed.push_back(lower(l));
  for (const auto& l : effect.updated_labels) changed.push_back(lower(l));
  effect.intent_achieved = std::any_of(targets.begin(), targets.end(), [&](const std::string& t) {
    return std::find(changed.begin(), changed.end(), t) != changed.end();
  });
  return effect;
}

Reflections ScriptedExplorer::reflect(const ReflectionRequest& req) {
  Reflections out;
  const std::string action = serialize_action(req.action);
  std::vector<Action> taken(req.history.begin(), req.history.end());
  taken.push_back(req.action);
  for (const auto& c : candidates(req.after, req.subtask, taken)) {
    if (c.action == req.action) continue;
    out.child = "next, do " + serialize_action(c.action) + ": " + c.intent;
    break;
  }
  if (out.child.empty()) out.child = "next, verify the subtask objective: " + req.subtask.objective;
  out.sibling = (req.effect.intent_achieved ? "continue past " : "avoid ") + action + ": " + req.effect.description;
  return out;
}

std::string ScriptedExplorer::reflect_simulation(const ReflectionRequest& req) {
  return (req.effect.intent_achieved ? "recommend " : "avoid ") + serialize_action(req.action) + ": " +
         req.effect.description;
}

Appraisal ScriptedAppraiser::score(const AppraisalRequest& req) {
  Appraisal a;
  const EnvState before = ctx_->state_of(req.before);
  if (req.effect.kind == EffectKind::NoChange) {
    a.s_eff = 2;
  } else if (req.effect.intent_achieved &&
             ctx_->policy().solution.contains(before.page + ":" + serialize_action(req.action))) {
    a.s_eff = 9;
  } else {
    a.s_eff = 5;
  }
  const SubtaskScript* sc = ctx_->policy().find(req.subtask);
  if (!sc) {
    a.s_fut = 5;
  } else {
    const int d = ctx_->goal_distance(ctx_->state_of(req.after), sc->goal, 5);
    a.s_fut = std::clamp(10 - 2 * d, 0, 10);
  }
  return a;
}

ContinuationDecision ScriptedController::decide(const Subtask& subtask, std::span<const Action>,
                                                const Observation& observation) {
  const SubtaskScript& sc = require_script(*ctx_, subtask);
  const EnvState state = ctx_->state_of(observation);
  const GoalPredicate& stop_when = sc.stop_when ? *sc.stop_when : sc.goal;
  if (stop_when.holds(state, observation)) return {true, "objective reached: " + subtask.objective};
  for (const auto& m : sc.milestones) {
    if (!m.done_when.holds(state, observation)) return {false, m.todo};
  }
  return {false, "continue toward: " + subtask.objective};
}

CompletenessVerdict ScriptedController::assess(const Subtask& subtask, std::span<const Action> history,
                                               const Observation& observation) {
  const SubtaskScript& sc = require_script(*ctx_, subtask);
  CompletenessVerdict v;
  if (sc.goal.holds(ctx_->state_of(observation), observation)) {
    v.completeness = {true, "The subtask is complete: " + subtask.objective};
    return v;
  }
  v.completeness = {false, "The subtask is incomplete: the '" + observation.title +
                               "' page does not satisfy the objective."};
  if (history.empty()) {
    v.subtask_reflection = "no action reached the objective. Focus on: " + subtask.objective;
  } else {
    v.subtask_reflection = "avoid " + serialize_action(history.back()) + ": it led to the '" + observation.title +
                           "' page instead of the objective. Focus on: " + subtask.objective;
  }
  return v;
}

ExtractorStep ScriptedExtractor::step(const Subtask& subtask, const Observation& observation) {
  const SubtaskScript& sc = require_script(*ctx_, subtask);
  ExtractorStep out;
  if (sc.extract_pattern.empty()) return out;
  const std::regex re(sc.extract_pattern);
  std::string answer;
  bool found = false;
  for (const auto& e : observation.elements) {
    std::smatch m;
    if (!std::regex_search(e.label, m, re)) continue;
    if (found) answer += ", ";
    answer += m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
    found = true;
  }
  if (found) out.answer = answer;
  return out;
}

OracleSuite make_scripted_suite(std::shared_ptr<const ScriptContext> ctx) {
  OracleSuite s;
  s.planner = std::make_shared<ScriptedPlanner>(ctx);
  s.explorer = std::make_shared<ScriptedExplorer>(ctx);
  s.appraiser = std::make_shared<ScriptedAppraiser>(ctx);
  s.controller = std::make_shared<ScriptedController>(ctx);
  s.verifier = std::make_shared<RuleVerifier>();
  s.extractor = std::make_shared<ScriptedExtractor>(ctx);
  return s;
}

OracleSuite make_scripted_suite(std::shared_ptr<const WorldSpec> world) {
  ScriptedPolicy policy = ScriptedPolicy::from_json(world->scripted);
  return make_scripted_suite(std::make_shared<const ScriptContext>(world, std::move(policy)));
}

}  // namespace wayfinder
