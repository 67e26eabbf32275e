#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wayfinder {

enum class EventKind {
  PlanGenerated,
  PlanRefined,
  SubtaskStart,
  Select,
  ExpandProposed,
  VerifierReject,
  Expanded,
  Scored,
  ControllerDecision,
  Simulated,
  Backprop,
  SubtaskEnd,
  ExtractionStep,
  Eval,
  OracleExchange,
};

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct TraceEvent {
  std::int64_t seq = 0;
  std::string run_id;
  EventKind kind = EventKind::Eval;
  nlohmann::json payload;
  std::string timestamp;
};

/// Reals in traces are decimal text with exactly six fractional digits,
/// rounded half-to-even on the exact binary value.
std::string format_real(double value);

/// Canonical JSONL line for an event (no trailing newline). Timestamps are
/// omitted when `with_timestamp` is false, which is the form used for
/// replay comparison and hashing.
std::string event_line(const TraceEvent& event, bool with_timestamp = true);
TraceEvent parse_event_line(std::string_view line);

/// Ordered, append-only event log owned by one run.
class Tracer {
 public:
  explicit Tracer(std::string run_id = "run") : run_id_(std::move(run_id)) {}

  const TraceEvent& emit(EventKind kind, nlohmann::json payload);

  std::span<const TraceEvent> events() const { return events_; }
  const std::string& run_id() const { return run_id_; }
  void set_run_id(std::string id) { run_id_ = std::move(id); }

  /// Count of events of one kind, convenient for budget assertions.
  std::size_t count(EventKind kind) const;

 private:
  std::string run_id_;
  std::vector<TraceEvent> events_;
};

/// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view data);

/// Hash over the timestamp-free event lines.
std::string trace_hash(std::span<const TraceEvent> events);

/// Trace file: first line `{"manifest": ...}`, then one event per line.
struct TraceFile {
  nlohmann::json manifest;
  std::vector<std::string> event_lines;  // raw lines as stored
};

void write_trace_file(const std::filesystem::path& path, const nlohmann::json& manifest,
                      std::span<const TraceEvent> events);
TraceFile read_trace_file(const std::filesystem::path& path);

}  // namespace wayfinder
