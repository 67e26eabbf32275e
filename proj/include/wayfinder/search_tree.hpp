#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wayfinder/config.hpp"
#include "wayfinder/environment.hpp"
#include "wayfinder/model.hpp"

namespace wayfinder {

using NodeId = int;

struct SearchNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::optional<Action> action_in;
  std::optional<Intent> intent_in;
  Observation observation;
  EnvSnapshot snapshot;
  int visits = 0;
  double q = 0;
  std::optional<Scores> scores;
  std::vector<NodeId> children;
  std::optional<std::string> child_reflection;  // handed to children as their parent reflection
  std::vector<std::string> sibling_reflections_seen;
  std::optional<std::string> simulation_reflection;  // consumed by the next expansion here
  int depth = 0;
  bool terminal = false;
  bool saturated = false;  // the Explorer ran out of fresh actions here

  // Running mean used only by the averaging backup.
  double value_sum = 0;
  int backups = 0;
};

/// Arena of nodes; node 0 is the root. Ids equal creation order.
class SearchTree {
 public:
  SearchTree(Observation root_observation, EnvSnapshot root_snapshot);

  NodeId root() const { return 0; }
  const SearchNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  SearchNode& node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const SearchNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  int expansions_used() const { return expansions_used_; }

  /// Adds a child with N = 0 and Q = scores.s_total. Throws BranchLimit,
  /// DuplicateSibling, DepthLimit, or Exhausted (node budget spent).
  NodeId attach_child(NodeId parent, Action action, Intent intent, Observation observation, EnvSnapshot snapshot,
                      Scores scores, const SearchConfig& cfg);

  /// A new child may be attached here.
  bool expandable(NodeId id, const SearchConfig& cfg) const;
  /// Some node in the subtree rooted at `id` is expandable.
  bool has_expandable(NodeId id, const SearchConfig& cfg) const;

  /// Node ids from the root down to `id`, inclusive.
  std::vector<NodeId> path_to(NodeId id) const;
  std::vector<Action> actions_to(NodeId id) const;

 private:
  std::vector<SearchNode> nodes_;
  int expansions_used_ = 0;
};

/// Exploration bonus w_puct * sqrt(parent visits) / (1 + edge visits).
double puct_bonus(int parent_visit_sum, int edge_visits, const SearchConfig& cfg);

/// Score of one selection arm; `child` is empty for the virtual expansion arm.
struct ArmScore {
  std::optional<NodeId> child;
  double score = 0;
};

/// All legal arms at `id` using its current visit count, expansion arm first.
std::vector<ArmScore> score_arms(const SearchTree& tree, NodeId id, const SearchConfig& cfg);

struct SelectionStep {
  enum class Kind { DescendTo, ExpandHere } kind = Kind::ExpandHere;
  NodeId node = 0;  // the child for DescendTo, the frontier for ExpandHere
};

/// One argmax decision at `id`. Ties go to the expansion arm, then to the
/// lowest child index. Throws Exhausted when `id` has no legal arm.
SelectionStep select_step(const SearchTree& tree, NodeId id, const SearchConfig& cfg);

struct FrontierSelection {
  NodeId frontier = 0;
  std::vector<NodeId> path;  // root .. frontier
};

/// Walks from the root, incrementing N of each node on the path before
/// scoring its arms, until the expansion arm wins. Throws Exhausted when no
/// expandable node remains.
FrontierSelection select_frontier(SearchTree& tree, const SearchConfig& cfg);

/// Ancestor Q updates produced by one backup, nearest ancestor first.
using QUpdates = std::vector<std::pair<NodeId, double>>;

/// Each ancestor's Q becomes max(its Q, Q of the child on the path).
QUpdates backpropagate_max(SearchTree& tree, NodeId from);
/// Comparator: each ancestor's Q becomes the running mean of the values
/// backed up through it.
QUpdates backpropagate_average(SearchTree& tree, NodeId from);
QUpdates backpropagate(SearchTree& tree, NodeId from, const SearchConfig& cfg);

/// Terminal node with the largest Q; ties resolve to the earliest node.
std::optional<NodeId> best_terminal(const SearchTree& tree);

}  // namespace wayfinder
