#include "wayfinder/action.hpp"

#include <algorithm>
#include <charconv>

#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

[[noreturn]] void malformed(std::string_view text, std::string_view why) {
  throw Error(ErrorCode::MalformedAction, std::string(why) + " in '" + std::string(text) + "'");
}

bool has_newline(std::string_view s) { return s.find_first_of("\r\n") != std::string_view::npos; }

int parse_id(std::string_view digits, std::string_view whole) {
  if (digits.empty()) malformed(whole, "missing element id");
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    malformed(whole, "bad element id");
  }
  if (digits.size() > 1 && digits.front() == '0') malformed(whole, "non-canonical element id");
  int id = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) malformed(whole, "bad element id");
  return id;
}

// Splits "verb [" ... "]" and returns the inside of the outermost brackets.
std::optional<std::string_view> bracketed(std::string_view text, std::string_view verb) {
  if (!text.starts_with(verb) || text.size() < verb.size() + 3) return std::nullopt;
  std::string_view rest = text.substr(verb.size());
  if (!rest.starts_with(" [") || !rest.ends_with("]")) return std::nullopt;
  return rest.substr(2, rest.size() - 3);
}

}  // namespace

Action Action::stop(std::optional<std::string> answer) {
  if (answer && answer->empty()) answer.reset();
  return Action{Stop{std::move(answer)}};
}

std::optional<int> Action::target() const {
  if (const auto* c = std::get_if<Click>(&value)) return c->element;
  if (const auto* t = std::get_if<TypeText>(&value)) return t->element;
  return std::nullopt;
}

std::string_view to_string(ScrollDirection dir) { return dir == ScrollDirection::Up ? "up" : "down"; }

Action parse_action(std::string_view text) {
  if (has_newline(text)) malformed(text, "newline");
  if (auto inner = bracketed(text, "click")) {
    return Action::click(parse_id(*inner, text));
  }
  if (auto inner = bracketed(text, "scroll")) {
    if (*inner == "up") return Action::scroll(ScrollDirection::Up);
    if (*inner == "down") return Action::scroll(ScrollDirection::Down);
    malformed(text, "scroll direction must be up or down");
  }
  if (auto inner = bracketed(text, "stop")) {
    return Action::stop(inner->empty() ? std::nullopt : std::optional<std::string>(*inner));
  }
  if (auto inner = bracketed(text, "type")) {
    // inner is "<id>] [<text>"
    auto sep = inner->find("] [");
    if (sep == std::string_view::npos) malformed(text, "type needs an id and a text argument");
    int id = parse_id(inner->substr(0, sep), text);
    return Action::type(id, std::string(inner->substr(sep + 3)));
  }
  malformed(text, "unknown action");
}

std::string serialize_action(const Action& action) {
  struct Visitor {
    std::string operator()(const Click& c) const { return "click [" + std::to_string(c.element) + "]"; }
    std::string operator()(const TypeText& t) const {
      return "type [" + std::to_string(t.element) + "] [" + t.text + "]";
    }
    std::string operator()(const Scroll& s) const { return "scroll [" + std::string(to_string(s.direction)) + "]"; }
    std::string operator()(const Stop& s) const { return "stop [" + s.answer.value_or("") + "]"; }
  };
  return std::visit(Visitor{}, action.value);
}

}  // namespace wayfinder
