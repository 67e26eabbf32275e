#pragma once

#include <deque>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wayfinder/trace.hpp"

namespace wayfinder {

struct LlmClientConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "gpt-4o";
  double temperature = 0.3;
  int max_tokens = 4096;
  std::string api_key_env = "WAYFINDER_API_KEY";
  int timeout_ms = 60000;
  int retries = 3;
  int backoff_ms = 500;  // first retry delay, doubled per retry

  void validate() const;
};

void to_json(nlohmann::json& j, const LlmClientConfig& cfg);
void from_json(const nlohmann::json& j, LlmClientConfig& cfg);

struct HttpResponse {
  int status = 0;  // 0 when the request never completed
  std::string body;
  std::string error;
};

/// Minimal POST-JSON transport so tests can substitute the network.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const std::string& body, const std::string& bearer,
                                 int timeout_ms) = 0;
};

/// Plain HTTP transport backed by cpp-httplib.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body, const std::string& bearer,
                         int timeout_ms) override;
};

/// One chat completion. Retries transient failures (no response, 429, 5xx)
/// with exponential backoff; 401/403 raise AuthFailure, other statuses raise
/// Transport, and a reply without choices[0].message.content raises
/// MalformedResponse.
std::string llm_complete(const LlmClientConfig& cfg, HttpTransport& transport, const std::string& system,
                         const std::string& user);

/// Fields of a key-tagged reply. Lines of the form `<tag>: value` open a
/// field; following untagged lines continue it. Code fences are ignored.
using TaggedFields = std::vector<std::pair<std::string, std::string>>;
TaggedFields parse_tagged(const std::string& text);
std::optional<std::string> tag_value(const TaggedFields& fields, const std::string& tag);

/// Replaces `{name}` placeholders; unknown placeholders are left as is.
std::string fill_template(const std::string& tmpl, const std::vector<std::pair<std::string, std::string>>& values);

/// Prompt templates loaded from a directory, one `<name>.txt` per call.
class PromptSet {
 public:
  static PromptSet load(const std::filesystem::path& dir);
  const std::string& get(const std::string& name) const;
  const std::string& system() const { return get("system"); }

 private:
  std::vector<std::pair<std::string, std::string>> templates_;
};

/// Shared conversation channel for every remote role in a run. Live
/// sessions call the endpoint and record each exchange into the trace;
/// replay sessions answer from recorded exchanges without the network.
class LlmSession {
 public:
  LlmSession(LlmClientConfig cfg, std::shared_ptr<HttpTransport> transport, PromptSet prompts);
  /// Replay from recorded OracleExchange payloads.
  LlmSession(PromptSet prompts, std::deque<nlohmann::json> recorded);

  void attach(Tracer* tracer) { tracer_ = tracer; }
  const PromptSet& prompts() const { return prompts_; }

  /// Sends the filled template for `call` and returns the parsed fields. A
  /// reply missing any of `required` gets one repair request before
  /// MalformedResponse.
  TaggedFields ask(const std::string& role, const std::string& call,
                   const std::vector<std::pair<std::string, std::string>>& values,
                   const std::vector<std::string>& required);

 private:
  std::string exchange(const std::string& role, const std::string& call, const std::string& system,
                       const std::string& user);

  std::optional<LlmClientConfig> cfg_;
  std::shared_ptr<HttpTransport> transport_;
  PromptSet prompts_;
  std::deque<nlohmann::json> recorded_;
  Tracer* tracer_ = nullptr;
};

}  // namespace wayfinder
