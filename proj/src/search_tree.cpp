#include "wayfinder/search_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wayfinder/error.hpp"

namespace wayfinder {

SearchTree::SearchTree(Observation root_observation, EnvSnapshot root_snapshot) {
  SearchNode root;
  root.observation = std::move(root_observation);
  root.snapshot = std::move(root_snapshot);
  nodes_.push_back(std::move(root));
}

NodeId SearchTree::attach_child(NodeId parent_id, Action action, Intent intent, Observation observation,
                                EnvSnapshot snapshot, Scores scores, const SearchConfig& cfg) {
  const SearchNode& parent = node(parent_id);
  if (expansions_used_ >= cfg.n_max) throw Error(ErrorCode::Exhausted, "node budget spent");
  if (static_cast<int>(parent.children.size()) >= cfg.branch_limit) {
    throw Error(ErrorCode::BranchLimit, "node " + std::to_string(parent_id) + " already has " +
                                            std::to_string(parent.children.size()) + " children");
  }
  if (parent.depth >= cfg.depth_max) {
    throw Error(ErrorCode::DepthLimit, "node " + std::to_string(parent_id) + " is at the depth limit");
  }
  const std::string text = serialize_action(action);
  for (NodeId c : parent.children) {
    if (serialize_action(*node(c).action_in) == text) {
      throw Error(ErrorCode::DuplicateSibling, "'" + text + "' already expanded under node " + std::to_string(parent_id));
    }
  }

  SearchNode child;
  child.id = static_cast<NodeId>(nodes_.size());
  child.parent = parent_id;
  child.action_in = std::move(action);
  child.intent_in = std::move(intent);
  child.observation = std::move(observation);
  child.snapshot = std::move(snapshot);
  child.q = scores.s_total;
  child.value_sum = scores.s_total;
  child.backups = 1;
  child.scores = scores;
  child.depth = parent.depth + 1;
  const NodeId id = child.id;
  nodes_.push_back(std::move(child));
  node(parent_id).children.push_back(id);
  ++expansions_used_;
  return id;
}

bool SearchTree::expandable(NodeId id, const SearchConfig& cfg) const {
  const SearchNode& n = node(id);
  return !n.terminal && !n.saturated && static_cast<int>(n.children.size()) < cfg.branch_limit &&
         n.depth < cfg.depth_max;
}

bool SearchTree::has_expandable(NodeId id, const SearchConfig& cfg) const {
  const SearchNode& n = node(id);
  if (n.terminal) return false;
  if (expandable(id, cfg)) return true;
  return std::any_of(n.children.begin(), n.children.end(), [&](NodeId c) { return has_expandable(c, cfg); });
}

std::vector<NodeId> SearchTree::path_to(NodeId id) const {
  std::vector<NodeId> path;
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent) path.push_back(*cur);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Action> SearchTree::actions_to(NodeId id) const {
  std::vector<Action> out;
  for (NodeId n : path_to(id)) {
    if (node(n).action_in) out.push_back(*node(n).action_in);
  }
  return out;
}

double puct_bonus(int parent_visit_sum, int edge_visits, const SearchConfig& cfg) {
  return cfg.w_puct * std::sqrt(static_cast<double>(parent_visit_sum)) / (1.0 + edge_visits);
}

std::vector<ArmScore> score_arms(const SearchTree& tree, NodeId id, const SearchConfig& cfg) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const SearchNode& n = tree.node(id);
  std::vector<ArmScore> arms;
  const bool classic = cfg.selection == SelectionMode::ClassicUct;

  if (tree.expandable(id, cfg)) {
    double seed = 0;
    if (cfg.q_seed_for_expansion_arm == ExpansionSeed::ParentTotal && n.scores) seed = n.scores->s_total;
    arms.push_back({std::nullopt, classic ? kInf : seed + puct_bonus(n.visits, 0, cfg)});
  }
  for (NodeId c : n.children) {
    if (!tree.has_expandable(c, cfg)) continue;
    const SearchNode& child = tree.node(c);
    double score = 0;
    if (classic) {
      // Untried arms carry unbounded priority; no +1 in the denominator.
      score = child.visits == 0
                  ? kInf
                  : child.q + cfg.w_puct * std::sqrt(static_cast<double>(n.visits)) / child.visits;
    } else {
      score = child.q + puct_bonus(n.visits, child.visits, cfg);
    }
    arms.push_back({c, score});
  }
  return arms;
}

SelectionStep select_step(const SearchTree& tree, NodeId id, const SearchConfig& cfg) {
  const auto arms = score_arms(tree, id, cfg);
  if (arms.empty()) throw Error(ErrorCode::Exhausted, "node " + std::to_string(id) + " has no legal arm");
  const ArmScore* best = &arms.front();
  for (const auto& arm : arms) {
    if (arm.score > best->score) best = &arm;
  }
  if (!best->child) return {SelectionStep::Kind::ExpandHere, id};
  return {SelectionStep::Kind::DescendTo, *best->child};
}

FrontierSelection select_frontier(SearchTree& tree, const SearchConfig& cfg) {
  if (!tree.has_expandable(tree.root(), cfg)) throw Error(ErrorCode::Exhausted, "no expandable node remains");
  FrontierSelection sel;
  NodeId cur = tree.root();
  while (true) {
    tree.node(cur).visits += 1;
    sel.path.push_back(cur);
    const SelectionStep step = select_step(tree, cur, cfg);
    if (step.kind == SelectionStep::Kind::ExpandHere) {
      sel.frontier = cur;
      return sel;
    }
    cur = step.node;
  }
}

QUpdates backpropagate_max(SearchTree& tree, NodeId from) {
  QUpdates updates;
  NodeId child = from;
  for (auto parent = tree.node(from).parent; parent; parent = tree.node(*parent).parent) {
    SearchNode& p = tree.node(*parent);
    p.q = std::max(p.q, tree.node(child).q);
    updates.emplace_back(*parent, p.q);
    child = *parent;
  }
  return updates;
}

QUpdates backpropagate_average(SearchTree& tree, NodeId from) {
  QUpdates updates;
  const double value = tree.node(from).q;
  for (auto parent = tree.node(from).parent; parent; parent = tree.node(*parent).parent) {
    SearchNode& p = tree.node(*parent);
    p.value_sum += value;
    p.backups += 1;
    p.q = p.value_sum / p.backups;
    updates.emplace_back(*parent, p.q);
  }
  return updates;
}

QUpdates backpropagate(SearchTree& tree, NodeId from, const SearchConfig& cfg) {
  return cfg.backprop == BackpropMode::Average ? backpropagate_average(tree, from) : backpropagate_max(tree, from);
}

std::optional<NodeId> best_terminal(const SearchTree& tree) {
  std::optional<NodeId> best;
  for (const auto& n : tree.nodes()) {
    if (!n.terminal) continue;
    if (!best || n.q > tree.node(*best).q) best = n.id;
  }
  return best;
}

}  // namespace wayfinder
