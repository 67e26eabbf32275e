#include "wayfinder/trace.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <utility>

#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 15> kKinds{{
    {EventKind::PlanGenerated, "PlanGenerated"},
    {EventKind::PlanRefined, "PlanRefined"},
    {EventKind::SubtaskStart, "SubtaskStart"},
    {EventKind::Select, "Select"},
    {EventKind::ExpandProposed, "ExpandProposed"},
    {EventKind::VerifierReject, "VerifierReject"},
    {EventKind::Expanded, "Expanded"},
    {EventKind::Scored, "Scored"},
    {EventKind::ControllerDecision, "ControllerDecision"},
    {EventKind::Simulated, "Simulated"},
    {EventKind::Backprop, "Backprop"},
    {EventKind::SubtaskEnd, "SubtaskEnd"},
    {EventKind::ExtractionStep, "ExtractionStep"},
    {EventKind::Eval, "Eval"},
    {EventKind::OracleExchange, "OracleExchange"},
}};

std::string utc_now() {
  using namespace std::chrono;
  const auto now = time_point_cast<milliseconds>(system_clock::now());
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char ms[8];
  std::snprintf(ms, sizeof ms, ".%03dZ", static_cast<int>(now.time_since_epoch().count() % 1000));
  return std::string(buf) + ms;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "Unknown";
}

EventKind parse_event_kind(std::string_view text) {
  for (const auto& [k, name] : kKinds) {
    if (name == text) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown event kind '" + std::string(text) + "'");
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 6);
  if (ec != std::errc{}) return "nan";
  std::string out(buf, ptr);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

std::string event_line(const TraceEvent& event, bool with_timestamp) {
  // nlohmann::json objects keep keys sorted, so the dump is canonical.
  nlohmann::json j{{"seq", event.seq}, {"run_id", event.run_id}, {"kind", to_string(event.kind)},
                   {"payload", event.payload}};
  if (with_timestamp) j["ts"] = event.timestamp;
  return j.dump();
}

TraceEvent parse_event_line(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    TraceEvent e;
    e.seq = j.at("seq").get<std::int64_t>();
    e.run_id = j.at("run_id").get<std::string>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
    e.timestamp = j.value("ts", std::string());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("bad trace line: ") + ex.what());
  }
}

const TraceEvent& Tracer::emit(EventKind kind, nlohmann::json payload) {
  TraceEvent e;
  e.seq = static_cast<std::int64_t>(events_.size());
  e.run_id = run_id_;
  e.kind = kind;
  e.payload = std::move(payload);
  e.timestamp = utc_now();
  events_.push_back(std::move(e));
  return events_.back();
}

std::size_t Tracer::count(EventKind kind) const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.kind == kind ? 1 : 0;
  return n;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string trace_hash(std::span<const TraceEvent> events) {
  std::string all;
  for (const auto& e : events) {
    all += event_line(e, false);
    all += '\n';
  }
  return sha256_hex(all);
}

void write_trace_file(const std::filesystem::path& path, const nlohmann::json& manifest,
                      std::span<const TraceEvent> events) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << nlohmann::json{{"manifest", manifest}}.dump() << '\n';
  for (const auto& e : events) out << event_line(e) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

TraceFile read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open trace '" + path.string() + "'");
  TraceFile tf;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty trace file");
  try {
    tf.manifest = nlohmann::json::parse(line).at("manifest");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad trace manifest: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (!line.empty()) tf.event_lines.push_back(line);
  }
  return tf;
}

}  // namespace wayfinder
