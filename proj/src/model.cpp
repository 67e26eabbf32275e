#include "wayfinder/model.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

constexpr std::array<std::pair<ElementRole, std::string_view>, 6> kRoles{{
    {ElementRole::Link, "link"},
    {ElementRole::Button, "button"},
    {ElementRole::Textbox, "textbox"},
    {ElementRole::StaticText, "statictext"},
    {ElementRole::MenuItem, "menuitem"},
    {ElementRole::Tab, "tab"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedAction: return "MalformedAction";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InvalidElement: return "InvalidElement";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::StaleSnapshot: return "StaleSnapshot";
    case ErrorCode::BranchLimit: return "BranchLimit";
    case ErrorCode::DuplicateSibling: return "DuplicateSibling";
    case ErrorCode::DepthLimit: return "DepthLimit";
    case ErrorCode::Exhausted: return "Exhausted";
    case ErrorCode::VerifierExhausted: return "VerifierExhausted";
    case ErrorCode::NoProposal: return "NoProposal";
    case ErrorCode::PlannerError: return "PlannerError";
    case ErrorCode::OracleError: return "OracleError";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(SubtaskKind kind) {
  return kind == SubtaskKind::Extraction ? "extraction" : "interaction";
}

SubtaskKind parse_subtask_kind(std::string_view text) {
  if (text == "extraction") return SubtaskKind::Extraction;
  if (text == "interaction") return SubtaskKind::Interaction;
  throw Error(ErrorCode::ParseError, "unknown subtask kind '" + std::string(text) + "'");
}

std::string_view to_string(ElementRole role) {
  for (const auto& [r, name] : kRoles) {
    if (r == role) return name;
  }
  return "statictext";
}

ElementRole parse_element_role(std::string_view text) {
  for (const auto& [r, name] : kRoles) {
    if (name == text) return r;
  }
  throw Error(ErrorCode::ParseError, "unknown element role '" + std::string(text) + "'");
}

std::string_view to_string(EffectKind kind) {
  switch (kind) {
    case EffectKind::NewPage: return "NewPage";
    case EffectKind::InPlaceChange: return "InPlaceChange";
    case EffectKind::NoChange: return "NoChange";
  }
  return "NoChange";
}

const ElementView* Observation::find(int id) const {
  auto it = std::find_if(elements.begin(), elements.end(), [id](const ElementView& e) { return e.id == id; });
  return it == elements.end() ? nullptr : &*it;
}

}  // namespace wayfinder
