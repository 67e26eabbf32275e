#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string_view>

namespace wayfinder {

enum class ExpansionSeed { ParentTotal, Zero };
enum class BackpropMode { Max, Average };
enum class SelectionMode { Gos, ClassicUct };
enum class FailurePolicy { Continue, Abort };

std::string_view to_string(ExpansionSeed v);
std::string_view to_string(BackpropMode v);
std::string_view to_string(SelectionMode v);
std::string_view to_string(FailurePolicy v);

/// Search and run parameters. Defaults: node budget 10, exploration bias 5,
/// depth 5, 3 branches.
struct SearchConfig {
  int n_max = 10;
  double w_puct = 5.0;
  int depth_max = 5;
  int branch_limit = 3;
  double w_eff = 0.5;
  double w_fut = 0.5;
  int n_scroll_max = 5;
  int max_subtask_attempts = 2;
  ExpansionSeed q_seed_for_expansion_arm = ExpansionSeed::ParentTotal;

  // Ablation switches; the defaults are the method as designed.
  BackpropMode backprop = BackpropMode::Max;
  SelectionMode selection = SelectionMode::Gos;
  FailurePolicy failure_policy = FailurePolicy::Continue;

  /// Throws Error(ConfigError) when any bound is violated.
  void validate() const;

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

/// Weighted total of the two appraisal scores. Throws OutOfRange when an
/// input leaves [0, 10].
double total_score(double s_eff, double s_fut, const SearchConfig& cfg);

void to_json(nlohmann::json& j, const SearchConfig& cfg);
/// Missing keys keep their defaults; the result is validated.
void from_json(const nlohmann::json& j, SearchConfig& cfg);

}  // namespace wayfinder
