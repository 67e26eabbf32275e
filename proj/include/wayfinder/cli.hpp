#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wayfinder/config.hpp"
#include "wayfinder/global_optimizer.hpp"
#include "wayfinder/llm.hpp"
#include "wayfinder/trace.hpp"

namespace wayfinder {

inline constexpr const char* kToolVersion = "0.3.0";

/// Flags shared by `run` and `search`.
struct RunRequest {
  std::string command = "run";
  std::filesystem::path world;
  std::string task;
  int subtask = 0;  // search only
  std::string oracles = "scripted";
  std::optional<std::filesystem::path> config;
  std::optional<std::string> backprop;
  std::optional<std::string> selection;
  std::optional<std::string> seed_arm;
  std::optional<std::filesystem::path> prompts;
};

/// Role name to "scripted" or "remote". Accepts `scripted`, `remote`, or
/// `mixed:role=remote,role=scripted` (unlisted roles stay scripted).
nlohmann::json parse_oracle_selection(const std::string& spec);

/// Reads the config file (search keys plus optional "llm" and "prompts"),
/// applies flag overrides, and hashes the inputs into a manifest.
nlohmann::json build_manifest(const RunRequest& request);

/// Run id derived from the manifest content.
std::string manifest_run_id(const nlohmann::json& manifest);

struct ExecutionHooks {
  std::shared_ptr<HttpTransport> transport;            // live remote roles; defaults to httplib
  std::optional<std::deque<nlohmann::json>> recorded;  // replay remote roles from these exchanges
};

struct Execution {
  nlohmann::json manifest;
  Tracer tracer;
  std::optional<RunResult> run;
  nlohmann::json tree;  // search only: final tree dump
  int exit_code = 0;
};

/// Executes the run a manifest describes. Throws on configuration, I/O,
/// and oracle errors.
Execution execute(const nlohmann::json& manifest, const ExecutionHooks& hooks = {});

/// Tree dump for `search`: every node with N, Q, scores and reflections.
nlohmann::json dump_tree(const SearchTree& tree);

struct ReplayVerdict {
  bool identical = true;
  std::int64_t diverges_at = -1;
  std::string detail;

  std::string text() const;
};

/// Re-executes the run in a trace file and compares event streams without
/// timestamps. A config that differs from the manifest raises ManifestMismatch.
ReplayVerdict replay_trace(const std::filesystem::path& trace, const std::optional<SearchConfig>& config = {},
                           const ExecutionHooks& hooks = {});

/// Plan, per-subtask attempts, tree summary and eval verdict.
std::string render_report(const nlohmann::json& manifest, std::span<const TraceEvent> events);

/// Entry point behind the `wayfinder` binary. Exit 0 on success, 1 when the
/// task evaluation fails or a replay diverges, 2 on any error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wayfinder
