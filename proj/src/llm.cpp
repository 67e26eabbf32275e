#include "wayfinder/llm.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include "wayfinder/error.hpp"
#include "wayfinder/world.hpp"

namespace wayfinder {

using nlohmann::json;

void LlmClientConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorCode::ConfigError, "llm endpoint is empty");
  if (model.empty()) throw Error(ErrorCode::ConfigError, "llm model is empty");
  if (temperature < 0) throw Error(ErrorCode::ConfigError, "temperature must be non-negative");
  if (max_tokens <= 0) throw Error(ErrorCode::ConfigError, "max_tokens must be positive");
  if (timeout_ms <= 0) throw Error(ErrorCode::ConfigError, "timeout_ms must be positive");
  if (retries < 0) throw Error(ErrorCode::ConfigError, "retries must be non-negative");
}

void to_json(json& j, const LlmClientConfig& c) {
  j = json{{"endpoint", c.endpoint},       {"model", c.model},           {"temperature", c.temperature},
           {"max_tokens", c.max_tokens},   {"api_key_env", c.api_key_env}, {"timeout_ms", c.timeout_ms},
           {"retries", c.retries},         {"backoff_ms", c.backoff_ms}};
}

void from_json(const json& j, LlmClientConfig& c) {
  try {
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.retries = j.value("retries", c.retries);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad llm config: ") + e.what());
  }
  c.validate();
}

HttpResponse HttplibTransport::post_json(const std::string& url, const std::string& body, const std::string& bearer,
                                         int timeout_ms) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, url_re)) return {0, {}, "bad endpoint url '" + url + "'"};
  httplib::Client client(m[1].str());
  const auto secs = timeout_ms / 1000;
  const auto usecs = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  const std::string path = m[2].matched ? m[2].str() : "/";
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

std::string llm_complete(const LlmClientConfig& cfg, HttpTransport& transport, const std::string& system,
                         const std::string& user) {
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::ConfigError, "environment variable " + cfg.api_key_env + " holds no api key");
  }
  const json request{{"model", cfg.model},
                     {"messages", json::array({{{"role", "system"}, {"content", system}},
                                               {{"role", "user"}, {"content", user}}})},
                     {"temperature", cfg.temperature},
                     {"max_tokens", cfg.max_tokens}};
  const std::string body = request.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
    HttpResponse res = transport.post_json(cfg.endpoint, body, key, cfg.timeout_ms);
    if (res.status == 401 || res.status == 403) {
      throw Error(ErrorCode::AuthFailure, "endpoint refused credentials (HTTP " + std::to_string(res.status) + ")");
    }
    if (res.status == 0 || res.status == 429 || res.status >= 500) {
      last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200) throw Error(ErrorCode::Transport, "HTTP " + std::to_string(res.status) + ": " + res.body);
    try {
      return json::parse(res.body).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("unexpected completion body: ") + e.what());
    }
  }
  throw Error(ErrorCode::Transport, "gave up after " + std::to_string(cfg.retries + 1) + " tries: " + last_error);
}

TaggedFields parse_tagged(const std::string& text) {
  static const std::regex tag_re(R"(^\s*<([A-Za-z_][A-Za-z0-9_]*)>\s*:?\s*(.*?)\s*(?:</\1>)?\s*$)");
  TaggedFields out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("```", 0) == 0) continue;
    std::smatch m;
    if (std::regex_match(line, m, tag_re)) {
      out.emplace_back(m[1].str(), m[2].str());
    } else if (!out.empty()) {
      auto& value = out.back().second;
      if (!value.empty()) value += '\n';
      value += line;
    }
  }
  for (auto& [tag, value] : out) {
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
  }
  return out;
}

std::optional<std::string> tag_value(const TaggedFields& fields, const std::string& tag) {
  for (const auto& [t, v] : fields) {
    if (t == tag) return v;
  }
  return std::nullopt;
}

std::string fill_template(const std::string& tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string::npos) break;
    auto close = tmpl.find('}', open + 1);
    if (close == std::string::npos) break;
    out.append(tmpl, pos, open - pos);
    const std::string name = tmpl.substr(open + 1, close - open - 1);
    auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
    if (it == values.end()) {
      out.append(tmpl, open, close - open + 1);
    } else {
      out += it->second;
    }
    pos = close + 1;
  }
  out.append(tmpl, pos, std::string::npos);
  return out;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::ConfigError, "prompt directory not found: " + dir.string());
  PromptSet p;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) p.templates_.emplace_back(f.stem().string(), read_text_file(f));
  return p;
}

const std::string& PromptSet::get(const std::string& name) const {
  for (const auto& [n, t] : templates_) {
    if (n == name) return t;
  }
  throw Error(ErrorCode::ConfigError, "missing prompt template '" + name + ".txt'");
}

LlmSession::LlmSession(LlmClientConfig cfg, std::shared_ptr<HttpTransport> transport, PromptSet prompts)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), prompts_(std::move(prompts)) {
  cfg_->validate();
}

LlmSession::LlmSession(PromptSet prompts, std::deque<json> recorded)
    : prompts_(std::move(prompts)), recorded_(std::move(recorded)) {}

std::string LlmSession::exchange(const std::string& role, const std::string& call, const std::string& system,
                                 const std::string& user) {
  std::string reply;
  if (cfg_) {
    reply = llm_complete(*cfg_, *transport_, system, user);
  } else {
    if (recorded_.empty()) throw Error(ErrorCode::Transport, "no recorded exchange left for " + role + "." + call);
    reply = recorded_.front().at("response").get<std::string>();
    recorded_.pop_front();
  }
  if (tracer_) {
    tracer_->emit(EventKind::OracleExchange,
                  {{"role", role}, {"call", call}, {"system", system}, {"user", user}, {"response", reply}});
  }
  return reply;
}

TaggedFields LlmSession::ask(const std::string& role, const std::string& call,
                             const std::vector<std::pair<std::string, std::string>>& values,
                             const std::vector<std::string>& required) {
  const std::string system = fill_template(prompts_.system(), {{"role", role}});
  const std::string user = fill_template(prompts_.get(call), values);
  auto missing = [&](const TaggedFields& f) -> std::optional<std::string> {
    for (const auto& tag : required) {
      if (!tag_value(f, tag)) return tag;
    }
    return std::nullopt;
  };
  TaggedFields fields = parse_tagged(exchange(role, call, system, user));
  auto gap = missing(fields);
  if (!gap) return fields;
  const std::string repair = fill_template(prompts_.get("repair"), {{"missing", "<" + *gap + ">"}, {"request", user}});
  fields = parse_tagged(exchange(role, call, system, repair));
  gap = missing(fields);
  if (gap) throw Error(ErrorCode::MalformedResponse, role + "." + call + " reply lacks <" + *gap + ">");
  return fields;
}

}  // namespace wayfinder
