#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "wayfinder/config.hpp"
#include "wayfinder/error.hpp"

using namespace wayfinder;

TEST(TotalScore, Examples) {
  const SearchConfig cfg;
  EXPECT_DOUBLE_EQ(total_score(9, 8, cfg), 8.5);
  EXPECT_DOUBLE_EQ(total_score(0, 0, cfg), 0);
  EXPECT_DOUBLE_EQ(total_score(10, 10, cfg), 10);
  SearchConfig skew;
  skew.w_eff = 0.25;
  skew.w_fut = 0.75;
  EXPECT_DOUBLE_EQ(total_score(10, 10, skew), 10);
  EXPECT_DOUBLE_EQ(total_score(4, 8, skew), 7);
}

TEST(TotalScore, RejectsOutOfRange) {
  const SearchConfig cfg;
  for (auto [a, b] : {std::pair{-1.0, 5.0}, {5.0, 10.5}, {11.0, 0.0}}) {
    try {
      total_score(a, b, cfg);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
    }
  }
}

TEST(SearchConfig, DefaultsAreValid) {
  const SearchConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.n_max, 10);
  EXPECT_EQ(cfg.w_puct, 5.0);
  EXPECT_EQ(cfg.depth_max, 5);
  EXPECT_EQ(cfg.branch_limit, 3);
}

TEST(SearchConfig, ValidationFailures) {
  auto bad = [](auto mutate) {
    SearchConfig c;
    mutate(c);
    try {
      c.validate();
      return false;
    } catch (const Error& e) {
      return e.code() == ErrorCode::ConfigError;
    }
  };
  EXPECT_TRUE(bad([](SearchConfig& c) { c.n_max = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.w_puct = -1; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.depth_max = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.branch_limit = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.w_eff = 0.7; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.n_scroll_max = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.max_subtask_attempts = 0; }));
}

TEST(SearchConfig, JsonRoundTripAndPartialDocs) {
  SearchConfig c;
  c.w_puct = 2.5;
  c.backprop = BackpropMode::Average;
  c.selection = SelectionMode::ClassicUct;
  c.q_seed_for_expansion_arm = ExpansionSeed::Zero;
  c.failure_policy = FailurePolicy::Abort;
  nlohmann::json j = c;
  EXPECT_EQ(j.get<SearchConfig>(), c);
  const auto partial = nlohmann::json{{"n_max", 4}}.get<SearchConfig>();
  EXPECT_EQ(partial.n_max, 4);
  EXPECT_EQ(partial.branch_limit, 3);
  EXPECT_THROW((nlohmann::json{{"n_max", -2}}.get<SearchConfig>()), Error);
}
