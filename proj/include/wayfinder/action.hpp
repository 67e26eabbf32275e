#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace wayfinder {

enum class ScrollDirection { Up, Down };

struct Click {
  int element = 0;
  friend bool operator==(const Click&, const Click&) = default;
};

struct TypeText {
  int element = 0;
  std::string text;
  friend bool operator==(const TypeText&, const TypeText&) = default;
};

struct Scroll {
  ScrollDirection direction = ScrollDirection::Down;
  friend bool operator==(const Scroll&, const Scroll&) = default;
};

/// Terminates an episode. An empty answer is normalized to no answer so the
/// canonical text form stays a bijection.
struct Stop {
  std::optional<std::string> answer;
  friend bool operator==(const Stop&, const Stop&) = default;
};

/// One agent action in the canonical grammar:
///   click [<id>]   type [<id>] [<text>]   scroll [up|down]   stop [<answer>]
struct Action {
  std::variant<Click, TypeText, Scroll, Stop> value;

  static Action click(int element) { return Action{Click{element}}; }
  static Action type(int element, std::string text) { return Action{TypeText{element, std::move(text)}}; }
  static Action scroll(ScrollDirection dir) { return Action{Scroll{dir}}; }
  static Action stop(std::optional<std::string> answer = std::nullopt);

  bool is_stop() const { return std::holds_alternative<Stop>(value); }
  bool is_scroll() const { return std::holds_alternative<Scroll>(value); }

  /// Element targeted by Click/Type, if any.
  std::optional<int> target() const;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Parses canonical text; throws Error(MalformedAction) on anything else,
/// including non-canonical spellings such as leading zeros or extra spaces.
Action parse_action(std::string_view text);

std::string serialize_action(const Action& action);

std::string_view to_string(ScrollDirection dir);

}  // namespace wayfinder
