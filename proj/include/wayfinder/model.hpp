#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "wayfinder/action.hpp"

namespace wayfinder {

struct Task {
  std::string id;
  std::string goal;
  std::string world_ref;
};

enum class SubtaskKind { Interaction, Extraction };

std::string_view to_string(SubtaskKind kind);
SubtaskKind parse_subtask_kind(std::string_view text);

struct Subtask {
  std::string description;
  std::string objective;
  SubtaskKind kind = SubtaskKind::Interaction;

  friend bool operator==(const Subtask&, const Subtask&) = default;
};

/// Decomposition state. Execution consumes `pending` front-first.
struct Plan {
  std::deque<Subtask> pending;
  std::vector<Subtask> completed;
};

enum class ElementRole { Link, Button, Textbox, StaticText, MenuItem, Tab };

std::string_view to_string(ElementRole role);
ElementRole parse_element_role(std::string_view text);

/// An element as it appears in an observation.
struct ElementView {
  int id = 0;
  ElementRole role = ElementRole::StaticText;
  std::string label;
  bool interactive = true;
  std::string value;  // current text of a textbox

  friend bool operator==(const ElementView&, const ElementView&) = default;
};

/// Text-only page observation: the rendered accessibility tree plus its
/// element table. `state_key` is a canonical fingerprint of the simulator
/// state; only simulator-aware test doubles read it.
struct Observation {
  std::string base_url;
  std::string title;
  std::string actree;
  std::vector<ElementView> elements;
  int window = 0;
  int window_count = 1;
  std::string state_key;

  const ElementView* find(int id) const;
  bool at_bottom() const { return window + 1 >= window_count; }

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Intent {
  std::string text;
};

enum class EffectKind { NewPage, InPlaceChange, NoChange };

std::string_view to_string(EffectKind kind);

struct Effect {
  EffectKind kind = EffectKind::NoChange;
  std::string description;
  bool intent_achieved = false;
  std::vector<std::string> added_labels;
  std::vector<std::string> removed_labels;
  std::vector<std::string> updated_labels;  // same element, new textbox value
};

/// Reflections offered to the Explorer. `sibling` carries every sibling
/// reflection seen at the frontier so far, one per line, oldest first.
struct ReflectionBundle {
  std::optional<std::string> parent;
  std::optional<std::string> sibling;
  std::optional<std::string> simulation;
  std::optional<std::string> subtask;

  friend bool operator==(const ReflectionBundle&, const ReflectionBundle&) = default;
};

struct Scores {
  double s_eff = 0;
  double s_fut = 0;
  double s_total = 0;
};

struct ContinuationDecision {
  bool stop = false;
  std::string reason;
};

struct Completeness {
  bool complete = false;
  std::string assessment;
};

}  // namespace wayfinder
