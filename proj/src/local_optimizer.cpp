#include "wayfinder/local_optimizer.hpp"

#include <algorithm>

#include "oracle_call.hpp"
#include "wayfinder/error.hpp"

namespace wayfinder {

using detail::call_oracle;
using nlohmann::json;

namespace {

std::optional<std::string> join_lines(const std::vector<std::string>& lines) {
  if (lines.empty()) return std::nullopt;
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

json opt_text(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::vector<Action> child_actions(const SearchTree& tree, NodeId id) {
  std::vector<Action> out;
  for (NodeId c : tree.node(id).children) out.push_back(*tree.node(c).action_in);
  return out;
}

}  // namespace

std::string_view to_string(SubtaskOutcome::Status status) {
  return status == SubtaskOutcome::Status::CompletedByController ? "CompletedByController" : "BudgetExhausted";
}

LocalOptimizer::LocalOptimizer(const Environment& env, OracleSuite& oracles, const SearchConfig& cfg, Tracer& tracer)
    : env_(env), oracles_(oracles), cfg_(cfg), tracer_(tracer) {
  oracles_.require_complete();
}

ReflectionBundle LocalOptimizer::reflections_at(const SearchTree& tree, NodeId node) const {
  const SearchNode& n = tree.node(node);
  ReflectionBundle b;
  b.parent = n.child_reflection;
  b.sibling = join_lines(n.sibling_reflections_seen);
  b.simulation = n.simulation_reflection;
  b.subtask = subtask_reflection_;
  return b;
}

Step LocalOptimizer::apply_guarded(const EnvSnapshot& from, const Observation& from_obs, const Action& action,
                                   std::optional<std::string>& error) const {
  try {
    return env_.apply(env_.restore(from), action);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidElement && e.code() != ErrorCode::InvalidInput) throw;
    error = e.what();
    return Step{from, from_obs};
  }
}

NodeId LocalOptimizer::expand_once(SearchTree& tree, NodeId frontier, const Subtask& subtask,
                                   const ReflectionBundle& reflections,
                                   const std::optional<ContinuationDecision>& continuation) {
  const std::vector<Action> history = tree.actions_to(frontier);
  const std::vector<Action> siblings = child_actions(tree, frontier);
  const Observation& before = tree.node(frontier).observation;
  const std::optional<std::string> reason =
      continuation ? std::optional<std::string>(continuation->reason) : std::nullopt;

  std::vector<std::string> rejections;
  std::optional<Proposal> accepted;
  for (int attempt = 0; attempt <= cfg_.branch_limit && !accepted; ++attempt) {
    ProposalRequest req{before, subtask, history, reflections, reason, rejections, tree.expansions_used(), false};
    Proposal p = call_oracle("explorer", [&] { return oracles_.explorer->propose(req); });
    tracer_.emit(EventKind::ExpandProposed, {{"frontier", frontier},
                                             {"attempt", attempt},
                                             {"action", serialize_action(p.action)},
                                             {"intent", p.intent.text}});
    const Verdict v = call_oracle("verifier", [&] { return oracles_.verifier->check(p.action, siblings, before); });
    if (v.accept) {
      accepted = std::move(p);
    } else {
      tracer_.emit(EventKind::VerifierReject,
                   {{"frontier", frontier}, {"action", serialize_action(p.action)}, {"reason", v.reason}});
      const std::string text = v.reason + ": " + serialize_action(p.action);
      // A repeated rejection means the Explorer has nothing fresh to offer.
      if (std::find(rejections.begin(), rejections.end(), text) != rejections.end()) break;
      rejections.push_back(text);
    }
  }
  if (!accepted) {
    throw Error(ErrorCode::VerifierExhausted,
                "no valid unique action at node " + std::to_string(frontier) + " after " +
                    std::to_string(rejections.size()) + " proposals");
  }

  const Action& action = accepted->action;
  const Intent& intent = accepted->intent;
  std::optional<std::string> env_error;
  Step after = apply_guarded(tree.node(frontier).snapshot, before, action, env_error);

  Effect effect;
  if (env_error) {
    effect.kind = EffectKind::NoChange;
    effect.description = "The action failed: " + *env_error;
  } else {
    effect = call_oracle("explorer", [&] { return oracles_.explorer->assess_effect(before, after.observation, intent); });
  }
  ReflectionRequest rreq{effect, subtask, action, intent, before, after.observation, history};
  Reflections refl = call_oracle("explorer", [&] { return oracles_.explorer->reflect(rreq); });
  AppraisalRequest areq{effect, action, before, after.observation, subtask};
  Appraisal ap = call_oracle("appraiser", [&] { return oracles_.appraiser->score(areq); });
  if (ap.s_eff < 0 || ap.s_eff > 10 || ap.s_fut < 0 || ap.s_fut > 10) {
    throw OracleError("appraiser", ErrorCode::OutOfRange,
                      "scores " + std::to_string(ap.s_eff) + "/" + std::to_string(ap.s_fut) + " outside [0, 10]");
  }
  Scores scores{static_cast<double>(ap.s_eff), static_cast<double>(ap.s_fut), 0};
  scores.s_total = total_score(scores.s_eff, scores.s_fut, cfg_);

  const NodeId id = tree.attach_child(frontier, action, intent, after.observation, after.snapshot, scores, cfg_);
  tree.node(id).child_reflection = refl.child;
  tree.node(frontier).sibling_reflections_seen.push_back(refl.sibling);

  const SearchNode& n = tree.node(id);
  tracer_.emit(EventKind::Expanded, {{"node", id},
                                     {"parent", frontier},
                                     {"depth", n.depth},
                                     {"action", serialize_action(action)},
                                     {"intent", intent.text},
                                     {"url", n.observation.base_url},
                                     {"effect", to_string(effect.kind)},
                                     {"effect_description", effect.description},
                                     {"intent_achieved", effect.intent_achieved},
                                     {"reflections_in",
                                      {{"parent", opt_text(reflections.parent)},
                                       {"sibling", opt_text(reflections.sibling)},
                                       {"simulation", opt_text(reflections.simulation)},
                                       {"subtask", opt_text(reflections.subtask)}}},
                                     {"continuation_in", opt_text(reason)},
                                     {"child_reflection", refl.child},
                                     {"sibling_reflection", refl.sibling}});
  tracer_.emit(EventKind::Scored, {{"node", id},
                                   {"s_eff", format_real(scores.s_eff)},
                                   {"s_fut", format_real(scores.s_fut)},
                                   {"s_total", format_real(scores.s_total)},
                                   {"q", format_real(n.q)}});
  return id;
}

std::pair<ContinuationDecision, std::optional<std::string>> LocalOptimizer::evaluate_and_simulate(
    SearchTree& tree, NodeId node, const Subtask& subtask) {
  const std::vector<Action> history = tree.actions_to(node);
  const Observation& obs = tree.node(node).observation;
  ContinuationDecision decision =
      call_oracle("controller", [&] { return oracles_.controller->decide(subtask, history, obs); });
  if (!decision.stop && decision.reason.empty()) {
    throw OracleError("controller", ErrorCode::MalformedResponse, "continuation reason is empty");
  }
  tracer_.emit(EventKind::ControllerDecision, {{"node", node}, {"stop", decision.stop}, {"reason", decision.reason}});
  if (decision.stop) {
    tree.node(node).terminal = true;
    return {std::move(decision), std::nullopt};
  }

  const ReflectionBundle bundle = reflections_at(tree, node);
  const std::optional<std::string> reason = decision.reason;
  const std::vector<Action> siblings = child_actions(tree, node);
  std::vector<std::string> rejections;
  std::optional<Proposal> sim;
  for (int attempt = 0; attempt <= cfg_.branch_limit && !sim; ++attempt) {
    ProposalRequest req{obs, subtask, history, bundle, reason, rejections, tree.expansions_used(), true};
    Proposal p = call_oracle("explorer", [&] { return oracles_.explorer->propose(req); });
    const Verdict v = call_oracle("verifier", [&] { return oracles_.verifier->check(p.action, siblings, obs); });
    if (v.accept) {
      sim = std::move(p);
    } else {
      rejections.push_back(v.reason + ": " + serialize_action(p.action));
    }
  }
  if (!sim) {
    tracer_.emit(EventKind::Simulated, {{"node", node}, {"action", nullptr}, {"reflection", nullptr}});
    return {std::move(decision), std::nullopt};
  }

  // The lookahead runs on a restored copy; the node keeps its own snapshot.
  std::optional<std::string> env_error;
  Step after = apply_guarded(tree.node(node).snapshot, obs, sim->action, env_error);
  Effect effect;
  if (env_error) {
    effect.description = "The action failed: " + *env_error;
  } else {
    effect = call_oracle("explorer", [&] { return oracles_.explorer->assess_effect(obs, after.observation, sim->intent); });
  }
  ReflectionRequest rreq{effect, subtask, sim->action, sim->intent, obs, after.observation, history};
  std::string r_sim = call_oracle("explorer", [&] { return oracles_.explorer->reflect_simulation(rreq); });
  tree.node(node).simulation_reflection = r_sim;
  tracer_.emit(EventKind::Simulated, {{"node", node},
                                      {"action", serialize_action(sim->action)},
                                      {"intent", sim->intent.text},
                                      {"effect", to_string(effect.kind)},
                                      {"intent_achieved", effect.intent_achieved},
                                      {"reflection", r_sim}});
  return {std::move(decision), std::move(r_sim)};
}

SubtaskOutcome LocalOptimizer::run_subtask(const Subtask& subtask, const EnvSnapshot& root_snapshot,
                                           const Observation& root_observation,
                                           const std::optional<std::string>& subtask_reflection) {
  if (subtask.kind != SubtaskKind::Interaction) {
    throw Error(ErrorCode::ConfigError, "run_subtask needs an interaction subtask");
  }
  subtask_reflection_ = subtask_reflection;
  SubtaskOutcome out(SearchTree(root_observation, env_.restore(root_snapshot)));
  SearchTree& tree = out.tree;
  std::optional<ContinuationDecision> continuation;
  std::optional<NodeId> stopped_at;

  while (tree.expansions_used() < cfg_.n_max) {
    FrontierSelection sel;
    try {
      sel = select_frontier(tree, cfg_);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Exhausted) throw;
      break;
    }
    json visits = json::array();
    for (NodeId n : sel.path) visits.push_back(tree.node(n).visits);
    tracer_.emit(EventKind::Select, {{"path", sel.path}, {"visits", visits}, {"frontier", sel.frontier}});

    const ReflectionBundle bundle = reflections_at(tree, sel.frontier);
    NodeId child = 0;
    try {
      child = expand_once(tree, sel.frontier, subtask, bundle, continuation);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::VerifierExhausted) throw;
      tree.node(sel.frontier).saturated = true;
      continue;
    }
    // The simulation reflection is consumed by the expansion that used it.
    tree.node(sel.frontier).simulation_reflection.reset();

    auto [decision, r_sim] = evaluate_and_simulate(tree, child, subtask);
    if (decision.stop) {
      stopped_at = child;
      break;
    }
    continuation = std::move(decision);
    const QUpdates updates = backpropagate(tree, child, cfg_);
    json ups = json::array();
    for (const auto& [id, q] : updates) ups.push_back({{"node", id}, {"q", format_real(q)}});
    tracer_.emit(EventKind::Backprop, {{"from", child}, {"mode", to_string(cfg_.backprop)}, {"updates", ups}});
  }

  NodeId final_node = tree.root();
  if (stopped_at) {
    out.status = SubtaskOutcome::Status::CompletedByController;
    final_node = *stopped_at;
  } else if (auto t = best_terminal(tree)) {
    final_node = *t;
  } else {
    // Best-valued leaf; ties go to the earliest node.
    double best = -1;
    for (const auto& n : tree.nodes()) {
      if (n.id == tree.root() || !n.children.empty()) continue;
      if (n.q > best) {
        best = n.q;
        final_node = n.id;
      }
    }
  }
  out.final_node = final_node;
  out.best_path = tree.actions_to(final_node);
  for (NodeId n : tree.path_to(final_node)) {
    if (n != tree.root()) out.path_states.push_back(tree.node(n).snapshot);
  }
  out.final_snapshot = tree.node(final_node).snapshot;
  out.final_observation = tree.node(final_node).observation;
  out.expansions_used = tree.expansions_used();
  subtask_reflection_.reset();
  return out;
}

}  // namespace wayfinder
