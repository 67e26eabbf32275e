#include "wayfinder/config.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

template <typename Enum>
Enum parse_enum(const nlohmann::json& j, std::initializer_list<Enum> values) {
  const auto text = j.get<std::string>();
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::ConfigError, "unknown value '" + text + "'");
}

}  // namespace

std::string_view to_string(ExpansionSeed v) { return v == ExpansionSeed::Zero ? "zero" : "parent"; }
std::string_view to_string(BackpropMode v) { return v == BackpropMode::Average ? "average" : "max"; }
std::string_view to_string(SelectionMode v) { return v == SelectionMode::ClassicUct ? "classic-uct" : "gos"; }
std::string_view to_string(FailurePolicy v) { return v == FailurePolicy::Abort ? "abort" : "continue"; }

void SearchConfig::validate() const {
  require(n_max > 0, "n_max must be positive");
  require(std::isfinite(w_puct) && w_puct >= 0, "w_puct must be non-negative");
  require(depth_max > 0, "depth_max must be positive");
  require(branch_limit > 0, "branch_limit must be positive");
  require(w_eff >= 0 && w_fut >= 0, "weights must be non-negative");
  require(std::abs(w_eff + w_fut - 1.0) <= 1e-9, "w_eff + w_fut must equal 1");
  require(n_scroll_max > 0, "n_scroll_max must be positive");
  require(max_subtask_attempts > 0, "max_subtask_attempts must be positive");
}

double total_score(double s_eff, double s_fut, const SearchConfig& cfg) {
  auto in_range = [](double s) { return s >= 0.0 && s <= 10.0; };
  if (!in_range(s_eff) || !in_range(s_fut)) {
    throw Error(ErrorCode::OutOfRange, "scores must lie in [0, 10]");
  }
  return cfg.w_eff * s_eff + cfg.w_fut * s_fut;
}

void to_json(nlohmann::json& j, const SearchConfig& cfg) {
  j = nlohmann::json{
      {"n_max", cfg.n_max},
      {"w_puct", cfg.w_puct},
      {"depth_max", cfg.depth_max},
      {"branch_limit", cfg.branch_limit},
      {"w_eff", cfg.w_eff},
      {"w_fut", cfg.w_fut},
      {"n_scroll_max", cfg.n_scroll_max},
      {"max_subtask_attempts", cfg.max_subtask_attempts},
      {"seed_arm", to_string(cfg.q_seed_for_expansion_arm)},
      {"backprop", to_string(cfg.backprop)},
      {"selection", to_string(cfg.selection)},
      {"failure_policy", to_string(cfg.failure_policy)},
  };
}

void from_json(const nlohmann::json& j, SearchConfig& cfg) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "search config must be an object");
  try {
    if (j.contains("n_max")) cfg.n_max = j.at("n_max").get<int>();
    if (j.contains("w_puct")) cfg.w_puct = j.at("w_puct").get<double>();
    if (j.contains("depth_max")) cfg.depth_max = j.at("depth_max").get<int>();
    if (j.contains("branch_limit")) cfg.branch_limit = j.at("branch_limit").get<int>();
    if (j.contains("w_eff")) cfg.w_eff = j.at("w_eff").get<double>();
    if (j.contains("w_fut")) cfg.w_fut = j.at("w_fut").get<double>();
    if (j.contains("n_scroll_max")) cfg.n_scroll_max = j.at("n_scroll_max").get<int>();
    if (j.contains("max_subtask_attempts")) cfg.max_subtask_attempts = j.at("max_subtask_attempts").get<int>();
    if (j.contains("seed_arm")) {
      cfg.q_seed_for_expansion_arm =
          parse_enum(j.at("seed_arm"), {ExpansionSeed::ParentTotal, ExpansionSeed::Zero});
    }
    if (j.contains("backprop")) cfg.backprop = parse_enum(j.at("backprop"), {BackpropMode::Max, BackpropMode::Average});
    if (j.contains("selection")) {
      cfg.selection = parse_enum(j.at("selection"), {SelectionMode::Gos, SelectionMode::ClassicUct});
    }
    if (j.contains("failure_policy")) {
      cfg.failure_policy = parse_enum(j.at("failure_policy"), {FailurePolicy::Continue, FailurePolicy::Abort});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  cfg.validate();
}

}  // namespace wayfinder
