#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>

#include "wayfinder/world.hpp"

namespace wayfinder {

/// Full simulator state. Reveal/conceal toggles are page-local and reset on
/// navigation.
struct EnvState {
  std::string page;
  int window = 0;
  std::set<int> revealed;
  std::set<int> concealed;
  VariableMap variables;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Canonical single-line encoding of a state; `decode_state_key` inverts it.
std::string encode_state_key(const EnvState& state);
EnvState decode_state_key(std::string_view key);

/// Immutable handle to a point in one environment instance's history.
class EnvSnapshot {
 public:
  EnvSnapshot() = default;

  std::uint64_t instance() const { return instance_; }
  const EnvState& state() const { return state_; }

  friend bool operator==(const EnvSnapshot&, const EnvSnapshot&) = default;

 private:
  friend class Environment;
  EnvSnapshot(std::uint64_t instance, EnvState state) : instance_(instance), state_(std::move(state)) {}

  std::uint64_t instance_ = 0;
  EnvState state_;
};

struct Step {
  EnvSnapshot snapshot;
  Observation observation;
};

/// Deterministic simulated web environment over a validated WorldSpec.
/// Each instance gets a distinct id; snapshots from other instances are
/// rejected as stale.
class Environment {
 public:
  explicit Environment(std::shared_ptr<const WorldSpec> world);

  const WorldSpec& world() const { return *world_; }
  std::shared_ptr<const WorldSpec> world_ptr() const { return world_; }
  std::uint64_t instance() const { return instance_; }

  Step reset() const;

  /// Throws InvalidElement when the target is not in the current
  /// observation and InvalidInput when Type targets a non-textbox.
  Step apply(const EnvSnapshot& snapshot, const Action& action) const;

  /// Validates ownership and returns an equivalent handle.
  EnvSnapshot restore(const EnvSnapshot& snapshot) const;

  Observation observe(const EnvSnapshot& snapshot) const;

  /// Builds a snapshot for an arbitrary state of this world (used by
  /// simulator-aware solvers).
  EnvSnapshot snapshot_of(EnvState state) const;

 private:
  void check_owned(const EnvSnapshot& snapshot) const;
  Observation render(const EnvState& state) const;
  bool visible(const ElementSpec& e, const EnvState& state) const;
  void fire(const Transition& t, EnvState& state) const;

  std::shared_ptr<const WorldSpec> world_;
  std::uint64_t instance_;
};

/// Trim, ASCII casefold, collapse internal whitespace runs.
std::string normalize_answer(std::string_view text);

/// Pure task verdict. `states[i]` is the state after `actions[i]`; the final
/// state is the last entry. When `final_answer` is empty the answer of the
/// last Stop action, if any, is used.
bool evaluate(const TaskSpec& task, std::span<const Action> actions, std::span<const EnvSnapshot> states,
              const std::optional<std::string>& final_answer);

/// Classifies the change between two observations: NewPage when base URLs
/// differ, InPlaceChange when only the actree differs, NoChange otherwise.
/// `intent_achieved` is left false for the Explorer to decide.
Effect diff_observations(const Observation& before, const Observation& after, const Intent& intent);

}  // namespace wayfinder
