#include <gtest/gtest.h>

#include <cstdlib>
#include <deque>

#include "mock_llm.hpp"
#include "wayfinder/error.hpp"
#include "wayfinder/llm.hpp"
#include "wayfinder/remote.hpp"

using namespace wayfinder;

namespace {

const std::filesystem::path kPrompts = WAYFINDER_PROMPTS_DIR;

/// Transport that replays scripted statuses and records what it was sent.
class ScriptedTransport final : public HttpTransport {
 public:
  explicit ScriptedTransport(std::deque<HttpResponse> replies) : replies_(std::move(replies)) {}
  HttpResponse post_json(const std::string& url, const std::string& body, const std::string& bearer,
                         int timeout_ms) override {
    urls.push_back(url);
    bodies.push_back(body);
    bearers.push_back(bearer);
    timeouts.push_back(timeout_ms);
    HttpResponse r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    return r;
  }
  std::vector<std::string> urls, bodies, bearers;
  std::vector<int> timeouts;

 private:
  std::deque<HttpResponse> replies_;
};

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

LlmClientConfig fast_config(const std::string& endpoint = "http://127.0.0.1:9/v1/chat/completions") {
  LlmClientConfig c;
  c.endpoint = endpoint;
  c.backoff_ms = 1;
  c.retries = 2;
  c.timeout_ms = 5000;
  return c;
}

class LlmTest : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv("WAYFINDER_API_KEY", "unit-key", 1); }
};

}  // namespace

TEST(ParseTagged, LinesAndContinuations) {
  const auto f = parse_tagged("```\n<action>: click [3]\n<intent>: open it\nand look around\n```\n<score>:7");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0], (std::pair<std::string, std::string>{"action", "click [3]"}));
  EXPECT_EQ(f[1].second, "open it\nand look around");
  EXPECT_EQ(tag_value(f, "score"), std::optional<std::string>("7"));
  EXPECT_FALSE(tag_value(f, "missing"));
  EXPECT_EQ(tag_value(parse_tagged("<stop>yes</stop>"), "stop"), std::optional<std::string>("yes"));
  EXPECT_TRUE(parse_tagged("no tags here").empty());
}

TEST(FillTemplate, KnownAndUnknownPlaceholders) {
  EXPECT_EQ(fill_template("{a} and {b} and {a}", {{"a", "x"}}), "x and {b} and x");
  EXPECT_EQ(fill_template("json {\"k\": 1", {{"k", "v"}}), "json {\"k\": 1");
  EXPECT_EQ(fill_template("{a}", {{"a", "{a}"}}), "{a}");
}

TEST(PromptSet, LoadsEveryCall) {
  const PromptSet p = PromptSet::load(kPrompts);
  for (const char* name : {"system", "planner_decompose", "planner_refine", "explorer_propose", "explorer_effect",
                           "explorer_reflect", "appraiser_score", "controller_decide", "controller_assess",
                           "verifier_check", "extractor_step", "repair"}) {
    EXPECT_FALSE(p.get(name).empty()) << name;
  }
  try {
    p.get("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  EXPECT_THROW(PromptSet::load(kPrompts / "absent"), Error);
}

TEST(LlmClientConfig, ValidationAndJson) {
  LlmClientConfig c = fast_config();
  nlohmann::json j = c;
  EXPECT_EQ(j.get<LlmClientConfig>().endpoint, c.endpoint);
  j["retries"] = -1;
  EXPECT_THROW(j.get<LlmClientConfig>(), Error);
  j = c;
  j["temperature"] = "hot";
  EXPECT_THROW(j.get<LlmClientConfig>(), Error);
}

TEST_F(LlmTest, RetriesServerErrorsThenSucceedsWithBearer) {
  ScriptedTransport t({{500, "", ""}, {0, "", "connection refused"}, {200, completion("hello"), ""}});
  EXPECT_EQ(llm_complete(fast_config(), t, "sys", "user"), "hello");
  ASSERT_EQ(t.bearers.size(), 3u);
  EXPECT_EQ(t.bearers[0], "unit-key");
  const auto body = nlohmann::json::parse(t.bodies[0]);
  EXPECT_EQ(body.at("messages").at(0).at("role"), "system");
  EXPECT_EQ(body.at("messages").at(1).at("content"), "user");
  EXPECT_EQ(body.at("model"), "gpt-4o");
}

TEST_F(LlmTest, GivesUpAfterRetries) {
  ScriptedTransport t({{503, "", ""}});
  try {
    llm_complete(fast_config(), t, "s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
  }
  EXPECT_EQ(t.urls.size(), 3u);
}

TEST_F(LlmTest, StatusMapping) {
  ScriptedTransport denied({{403, "", ""}});
  try {
    llm_complete(fast_config(), denied, "s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AuthFailure);
  }
  EXPECT_EQ(denied.urls.size(), 1u);
  ScriptedTransport bad_request({{400, "nope", ""}});
  EXPECT_THROW(llm_complete(fast_config(), bad_request, "s", "u"), Error);
  EXPECT_EQ(bad_request.urls.size(), 1u);
  ScriptedTransport junk({{200, "{\"choices\": []}", ""}});
  try {
    llm_complete(fast_config(), junk, "s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedResponse);
  }
}

TEST(LlmKey, MissingKeyIsConfigError) {
  LlmClientConfig c = fast_config();
  c.api_key_env = "WAYFINDER_UNIT_TEST_UNSET_KEY";
  ::unsetenv(c.api_key_env.c_str());
  ScriptedTransport t({{200, completion("x"), ""}});
  try {
    llm_complete(c, t, "s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  EXPECT_TRUE(t.urls.empty());
}

TEST_F(LlmTest, MockServerPlanAndAuthHeader) {
  mock::LlmServer server([](const std::string& call, const std::string&) {
    if (call != "planner_decompose") return std::string("<unknown>: x");
    return std::string(
        "<subtask>: Open the 'Orders' grid\n<objective>: the grid is shown\n<kind>: interaction\n"
        "<subtask>: Search for the order\n<objective>: the order row is shown\n<kind>: interaction\n"
        "<subtask>: Read the customer name\n<objective>: the name is known\n<kind>: extraction");
  });
  auto session = std::make_shared<LlmSession>(fast_config(server.endpoint()), std::make_shared<HttplibTransport>(),
                                               PromptSet::load(kPrompts));
  Tracer tracer;
  session->attach(&tracer);
  RemotePlanner planner(session);
  Observation obs;
  obs.actree = "RootWebArea 'Dashboard'";
  const Plan plan = planner.decompose(Task{"t", "Who placed order 170?", ""}, obs, "");
  ASSERT_EQ(plan.pending.size(), 3u);
  EXPECT_EQ(plan.pending[0].description, "Open the 'Orders' grid");
  EXPECT_EQ(plan.pending[2].kind, SubtaskKind::Extraction);
  EXPECT_EQ(server.requests(), 1);
  EXPECT_EQ(server.calls(), std::vector<std::string>{"planner_decompose"});
  EXPECT_EQ(server.auth_headers(), std::vector<std::string>{"Bearer unit-key"});
  ASSERT_EQ(tracer.count(EventKind::OracleExchange), 1u);
  EXPECT_EQ(tracer.events()[0].payload.at("call"), "planner_decompose");
}

TEST_F(LlmTest, MissingTagGetsOneRepair) {
  mock::LlmServer server([](const std::string&, const std::string& user) {
    return user.rfind("ROLE: repair", 0) == 0 ? std::string("<executed_action_effectiveness>: 7\n<future_promise>: 6")
                            : std::string("<executed_action_effectiveness>: 7");
  });
  auto session = std::make_shared<LlmSession>(fast_config(server.endpoint()), std::make_shared<HttplibTransport>(),
                                               PromptSet::load(kPrompts));
  const TaggedFields f = session->ask("appraiser", "appraiser_score", {},
                                      {"executed_action_effectiveness", "future_promise"});
  EXPECT_EQ(tag_value(f, "future_promise"), std::optional<std::string>("6"));
  EXPECT_EQ(server.requests(), 2);
}

TEST_F(LlmTest, StillMissingAfterRepairIsMalformed) {
  mock::LlmServer server([](const std::string&, const std::string&) { return std::string("<other>: 1"); });
  auto session = std::make_shared<LlmSession>(fast_config(server.endpoint()), std::make_shared<HttplibTransport>(),
                                               PromptSet::load(kPrompts));
  try {
    session->ask("appraiser", "appraiser_score", {}, {"future_promise"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedResponse);
  }
  EXPECT_EQ(server.requests(), 2);
}

TEST_F(LlmTest, UnauthorizedServerIsAuthFailure) {
  mock::LlmServer server(mock::pages_world_reply);
  server.set_status(401);
  auto session = std::make_shared<LlmSession>(fast_config(server.endpoint()), std::make_shared<HttplibTransport>(),
                                               PromptSet::load(kPrompts));
  try {
    session->ask("planner", "planner_decompose", {}, {"subtask"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AuthFailure);
  }
  EXPECT_EQ(server.requests(), 1);
}

TEST(LlmReplay, AnswersFromRecordingWithoutNetwork) {
  std::deque<nlohmann::json> recorded{{{"response", "<future_promise>: 4"}}};
  LlmSession session(PromptSet::load(kPrompts), recorded);
  EXPECT_EQ(tag_value(session.ask("appraiser", "appraiser_score", {}, {"future_promise"}), "future_promise"),
            std::optional<std::string>("4"));
  try {
    session.ask("appraiser", "appraiser_score", {}, {"future_promise"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
  }
}
