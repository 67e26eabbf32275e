#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wayfinder/model.hpp"

namespace wayfinder {

using VariableMap = std::map<std::string, std::string>;

/// What happens when an element is activated. Keys combine freely except
/// `no_effect`, which must stand alone. Values in `set` may reference
/// variables as `{{name}}`.
struct Transition {
  std::optional<std::string> goto_page;
  VariableMap set;
  std::vector<int> reveal;
  std::vector<int> hide;
  VariableMap requires_vars;  // guard: every listed variable must hold the value
  bool no_effect = false;
};

struct ElementSpec {
  int id = 0;
  ElementRole role = ElementRole::StaticText;
  std::string label;
  std::optional<Transition> on_click;
  std::optional<Transition> on_type;
  std::string binds;  // variable written by Type; textboxes only
  int window = 0;
  bool sticky = false;  // visible in every scroll window
  bool hidden = false;  // initially hidden until revealed
  VariableMap visible_when;
  std::vector<std::string> candidates;  // texts a brute-force solver may type

  bool accepts_text() const { return role == ElementRole::Textbox; }
  /// Statictext without an on_click is decoration; everything else can be
  /// activated (possibly to no effect).
  bool interactive() const { return role != ElementRole::StaticText || on_click.has_value(); }
};

struct PageSpec {
  std::string id;
  std::string base_url;
  std::string title;
  std::vector<ElementSpec> elements;
  int scroll_windows = 1;

  const ElementSpec* find(int element) const;
};

enum class EvalKind { StateMatch, AnswerMatch, ActionTraceMatch };

struct TaskSpec {
  Task task;
  EvalKind eval_kind = EvalKind::StateMatch;
  // StateMatch
  std::vector<std::string> pages;  // any of; empty means any page
  VariableMap variables;
  // AnswerMatch
  std::string expected_answer;
  // ActionTraceMatch
  std::vector<std::string> required_actions;
};

struct WorldSpec {
  std::string name;
  std::string domain;
  std::string start_page;
  std::map<std::string, PageSpec> pages;
  VariableMap variables;
  std::vector<TaskSpec> tasks;
  std::string demonstrations;  // path relative to the world file, may be empty
  nlohmann::json scripted;     // annotations consumed by the scripted oracles

  const PageSpec& page(const std::string& id) const;
  const TaskSpec* find_task(std::string_view id) const;
};

/// Parses and validates a world document. Throws ParseError for malformed
/// JSON or wrong field types, ValidationError for dangling references and
/// duplicate ids.
WorldSpec load_world(std::string_view document);

/// Resolves `path`, `path.json`, or `path/world.json`, then loads it.
std::filesystem::path resolve_world_path(const std::filesystem::path& path);
WorldSpec load_world_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace wayfinder
