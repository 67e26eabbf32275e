#include "wayfinder/oracles.hpp"

#include "wayfinder/error.hpp"

namespace wayfinder {

void OracleSuite::require_complete() const {
  if (!planner) throw Error(ErrorCode::ConfigError, "oracle suite has no planner");
  if (!explorer) throw Error(ErrorCode::ConfigError, "oracle suite has no explorer");
  if (!appraiser) throw Error(ErrorCode::ConfigError, "oracle suite has no appraiser");
  if (!controller) throw Error(ErrorCode::ConfigError, "oracle suite has no controller");
  if (!verifier) throw Error(ErrorCode::ConfigError, "oracle suite has no verifier");
  if (!extractor) throw Error(ErrorCode::ConfigError, "oracle suite has no extractor");
}

Verdict structural_check(const Action& action, std::span<const Action> siblings, const Observation& observation) {
  const std::string text = serialize_action(action);
  for (const auto& s : siblings) {
    if (serialize_action(s) == text) return Verdict::rejected("duplicate");
  }
  const auto target = action.target();
  if (!target) return Verdict::accepted();
  const ElementView* e = observation.find(*target);
  if (!e) return Verdict::rejected("invalid element");
  if (std::holds_alternative<TypeText>(action.value)) {
    if (e->role != ElementRole::Textbox) return Verdict::rejected("not a textbox");
  } else if (!e->interactive) {
    return Verdict::rejected("non-interactive element");
  }
  return Verdict::accepted();
}

}  // namespace wayfinder
