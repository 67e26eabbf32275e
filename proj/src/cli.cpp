#include "wayfinder/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "wayfinder/error.hpp"
#include "wayfinder/remote.hpp"
#include "wayfinder/scripted.hpp"

#ifndef WAYFINDER_DEFAULT_PROMPTS
#define WAYFINDER_DEFAULT_PROMPTS "prompts"
#endif

namespace wayfinder {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kRoles{"planner", "explorer", "appraiser", "controller", "verifier", "extractor"};

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "bad JSON in '" + path.string() + "': " + e.what());
  }
}

std::string prompts_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + read_text_file(f) + "\n";
  return sha256_hex(all);
}

bool any_remote(const json& oracles) {
  return std::any_of(oracles.begin(), oracles.end(), [](const json& v) { return v == "remote"; });
}

void check_hash(const std::string& what, const std::string& expected, const std::string& actual) {
  if (expected != actual) {
    throw Error(ErrorCode::ManifestMismatch, what + " changed since the trace was written");
  }
}

std::string opt_str(const json& j) { return j.is_string() ? j.get<std::string>() : std::string(); }

}  // namespace

json parse_oracle_selection(const std::string& spec) {
  json out = json::object();
  auto fill = [&](const std::string& v) {
    for (const auto& r : kRoles) out[r] = v;
  };
  if (spec == "scripted" || spec == "remote") {
    fill(spec);
    return out;
  }
  if (spec.rfind("mixed:", 0) != 0) {
    throw Error(ErrorCode::ConfigError, "--oracles must be scripted, remote, or mixed:<role>=<kind>,...");
  }
  fill("scripted");
  std::stringstream ss(spec.substr(6));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    const std::string role = item.substr(0, eq);
    const std::string kind = eq == std::string::npos ? "remote" : item.substr(eq + 1);
    if (std::find(kRoles.begin(), kRoles.end(), role) == kRoles.end()) {
      throw Error(ErrorCode::ConfigError, "unknown oracle role '" + role + "'");
    }
    if (kind != "scripted" && kind != "remote") {
      throw Error(ErrorCode::ConfigError, "oracle kind must be scripted or remote, got '" + kind + "'");
    }
    out[role] = kind;
  }
  return out;
}

std::string manifest_run_id(const json& manifest) { return sha256_hex(manifest.dump()).substr(0, 16); }

json build_manifest(const RunRequest& req) {
  const fs::path world_path = fs::absolute(resolve_world_path(req.world)).lexically_normal();
  const std::string content = read_text_file(world_path);
  const WorldSpec world = load_world(content);
  if (!world.find_task(req.task)) {
    throw Error(ErrorCode::ConfigError, "world '" + world.name + "' has no task '" + req.task + "'");
  }

  SearchConfig cfg;
  json file_cfg = json::object();
  if (req.config) file_cfg = parse_json_file(*req.config);
  from_json(file_cfg, cfg);
  json overrides = json::object();
  if (req.backprop) overrides["backprop"] = *req.backprop;
  if (req.selection) overrides["selection"] = *req.selection;
  if (req.seed_arm) overrides["seed_arm"] = *req.seed_arm;
  from_json(overrides, cfg);

  json m{{"tool", "wayfinder"},
         {"version", kToolVersion},
         {"command", req.command},
         {"world", {{"path", world_path.string()}, {"sha256", sha256_hex(content)}}},
         {"task", req.task},
         {"config", cfg},
         {"oracles", parse_oracle_selection(req.oracles)},
         {"demonstrations", nullptr}};
  if (req.command == "search") m["subtask"] = req.subtask;
  if (!world.demonstrations.empty()) {
    const fs::path demo = (world_path.parent_path() / world.demonstrations).lexically_normal();
    m["demonstrations"] = {{"path", demo.string()}, {"sha256", sha256_hex(read_text_file(demo))}};
  }
  if (any_remote(m["oracles"])) {
    LlmClientConfig llm;
    from_json(file_cfg.value("llm", json::object()), llm);
    m["llm"] = llm;
    fs::path dir = req.prompts ? *req.prompts : fs::path(file_cfg.value("prompts", std::string(WAYFINDER_DEFAULT_PROMPTS)));
    dir = fs::absolute(dir).lexically_normal();
    if (!fs::is_directory(dir)) throw Error(ErrorCode::ConfigError, "prompt directory not found: " + dir.string());
    m["prompts"] = {{"dir", dir.string()}, {"sha256", prompts_hash(dir)}};
  }
  return m;
}

namespace {

void execute_into(Execution& ex, const ExecutionHooks& hooks) {
  const json& m = ex.manifest;
  const fs::path world_path = m.at("world").at("path").get<std::string>();
  const std::string content = read_text_file(world_path);
  check_hash("world file '" + world_path.string() + "'", m.at("world").at("sha256"), sha256_hex(content));
  auto world = std::make_shared<const WorldSpec>(load_world(content));
  const TaskSpec* task = world->find_task(m.at("task").get<std::string>());
  if (!task) throw Error(ErrorCode::ConfigError, "unknown task '" + m.at("task").get<std::string>() + "'");
  const SearchConfig cfg = m.at("config").get<SearchConfig>();

  std::string demonstrations;
  if (m.at("demonstrations").is_object()) {
    const fs::path demo = m["demonstrations"].at("path").get<std::string>();
    demonstrations = read_text_file(demo);
    check_hash("demonstrations file", m["demonstrations"].at("sha256"), sha256_hex(demonstrations));
  }

  const Environment env(world);
  OracleSuite scripted = make_scripted_suite(world);
  OracleSuite remote;
  std::shared_ptr<LlmSession> session;
  if (any_remote(m.at("oracles"))) {
    const fs::path dir = m.at("prompts").at("dir").get<std::string>();
    check_hash("prompt templates", m["prompts"].at("sha256"), prompts_hash(dir));
    PromptSet prompts = PromptSet::load(dir);
    if (hooks.recorded) {
      session = std::make_shared<LlmSession>(std::move(prompts), *hooks.recorded);
    } else {
      auto transport = hooks.transport ? hooks.transport : std::make_shared<HttplibTransport>();
      session = std::make_shared<LlmSession>(m.at("llm").get<LlmClientConfig>(), transport, std::move(prompts));
    }
    session->attach(&ex.tracer);
    remote = make_remote_suite(session);
  }
  const json& sel = m.at("oracles");
  auto pick = [&](const std::string& role, auto member) {
    return sel.value(role, std::string("scripted")) == "remote" ? remote.*member : scripted.*member;
  };
  OracleSuite suite;
  suite.planner = pick("planner", &OracleSuite::planner);
  suite.explorer = pick("explorer", &OracleSuite::explorer);
  suite.appraiser = pick("appraiser", &OracleSuite::appraiser);
  suite.controller = pick("controller", &OracleSuite::controller);
  suite.verifier = pick("verifier", &OracleSuite::verifier);
  suite.extractor = pick("extractor", &OracleSuite::extractor);

  GlobalOptimizer global(env, suite, cfg, ex.tracer);
  if (m.at("command") == "search") {
    const Step start = env.reset();
    Plan plan = global.decompose(task->task, start.observation, demonstrations);
    const int index = m.value("subtask", 0);
    if (index < 0 || index >= static_cast<int>(plan.pending.size())) {
      throw Error(ErrorCode::ConfigError, "plan has no subtask " + std::to_string(index));
    }
    const Subtask subtask = plan.pending[static_cast<std::size_t>(index)];
    if (subtask.kind != SubtaskKind::Interaction) {
      throw Error(ErrorCode::ConfigError, "subtask " + std::to_string(index) + " is not an interaction subtask");
    }
    LocalOptimizer local(env, suite, cfg, ex.tracer);
    SubtaskOutcome out = local.run_subtask(subtask, start.snapshot, start.observation, std::nullopt);
    ex.tree = dump_tree(out.tree);
    ex.tree["status"] = to_string(out.status);
    ex.tree["expansions"] = out.expansions_used;
    ex.tree["final_node"] = out.final_node;
    json actions = json::array();
    for (const auto& a : out.best_path) actions.push_back(serialize_action(a));
    ex.tree["best_path"] = actions;
    ex.tracer.emit(EventKind::SubtaskEnd, {{"subtask", subtask.description},
                                           {"attempt", 1},
                                           {"status", to_string(out.status)},
                                           {"expansions", out.expansions_used},
                                           {"nodes", out.tree.size()},
                                           {"actions", actions}});
    ex.exit_code = out.status == SubtaskOutcome::Status::CompletedByController ? 0 : 1;
    return;
  }
  ex.run = global.run_task(*task, demonstrations);
  ex.exit_code = ex.run->success ? 0 : 1;
}

}  // namespace

Execution execute(const json& manifest, const ExecutionHooks& hooks) {
  Execution ex{manifest, Tracer(manifest_run_id(manifest)), std::nullopt, json(), 0};
  execute_into(ex, hooks);
  return ex;
}

json dump_tree(const SearchTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json j{{"id", n.id},
           {"parent", n.parent ? json(*n.parent) : json(nullptr)},
           {"depth", n.depth},
           {"action", n.action_in ? json(serialize_action(*n.action_in)) : json(nullptr)},
           {"intent", n.intent_in ? json(n.intent_in->text) : json(nullptr)},
           {"url", n.observation.base_url},
           {"N", n.visits},
           {"Q", format_real(n.q)},
           {"children", n.children},
           {"terminal", n.terminal},
           {"saturated", n.saturated},
           {"child_reflection", n.child_reflection ? json(*n.child_reflection) : json(nullptr)},
           {"sibling_reflections", n.sibling_reflections_seen}};
    if (n.scores) {
      j["s_eff"] = format_real(n.scores->s_eff);
      j["s_fut"] = format_real(n.scores->s_fut);
      j["s_total"] = format_real(n.scores->s_total);
    }
    nodes.push_back(std::move(j));
  }
  return {{"nodes", nodes}, {"expansions_used", tree.expansions_used()}};
}

std::string ReplayVerdict::text() const {
  return identical ? "Identical" : "DivergesAtSeq(" + std::to_string(diverges_at) + ")";
}

ReplayVerdict replay_trace(const fs::path& trace, const std::optional<SearchConfig>& config,
                           const ExecutionHooks& hooks) {
  const TraceFile tf = read_trace_file(trace);
  if (config) {
    const SearchConfig recorded = tf.manifest.at("config").get<SearchConfig>();
    if (!(recorded == *config)) {
      throw Error(ErrorCode::ManifestMismatch, "search config differs from the recorded manifest");
    }
  }
  ExecutionHooks replay_hooks = hooks;
  if (any_remote(tf.manifest.at("oracles")) && !replay_hooks.recorded) {
    std::deque<json> recorded;
    for (const auto& line : tf.event_lines) {
      try {
        TraceEvent e = parse_event_line(line);
        if (e.kind == EventKind::OracleExchange) recorded.push_back(e.payload);
      } catch (const Error&) {
      }
    }
    replay_hooks.recorded = std::move(recorded);
  }

  Execution ex{tf.manifest, Tracer(manifest_run_id(tf.manifest)), std::nullopt, json(), 0};
  std::string failure;
  try {
    execute_into(ex, replay_hooks);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ManifestMismatch || e.code() == ErrorCode::IoError) throw;
    failure = e.what();
  }

  const auto events = ex.tracer.events();
  ReplayVerdict v;
  const std::size_t n = std::min(events.size(), tf.event_lines.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string recorded;
    try {
      recorded = event_line(parse_event_line(tf.event_lines[i]), false);
    } catch (const Error& e) {
      return {false, static_cast<std::int64_t>(i), std::string("unreadable recorded event: ") + e.what()};
    }
    const std::string fresh = event_line(events[i], false);
    if (recorded != fresh) return {false, static_cast<std::int64_t>(i), "recorded " + recorded + "\nreplayed " + fresh};
  }
  if (events.size() != tf.event_lines.size()) {
    v = {false, static_cast<std::int64_t>(n),
         "recorded " + std::to_string(tf.event_lines.size()) + " events, replay produced " +
             std::to_string(events.size()) + (failure.empty() ? "" : " (" + failure + ")")};
  }
  return v;
}

std::string render_report(const json& manifest, std::span<const TraceEvent> events) {
  std::ostringstream o;
  o << "world: " << opt_str(manifest.value("world", json::object()).value("path", json())) << "\n";
  o << "task: " << opt_str(manifest.value("task", json())) << "  command: " << opt_str(manifest.value("command", json()))
    << "\n";
  if (manifest.contains("config")) o << "config: " << manifest["config"].dump() << "\n";
  if (manifest.contains("oracles")) o << "oracles: " << manifest["oracles"].dump() << "\n";
  int expanded = 0;
  int rejects = 0;
  int max_depth = 0;
  for (const auto& e : events) {
    const json& p = e.payload;
    switch (e.kind) {
      case EventKind::PlanGenerated:
        o << "plan:\n";
        for (std::size_t i = 0; i < p.at("subtasks").size(); ++i) {
          const auto& s = p["subtasks"][i];
          o << "  " << i + 1 << ". [" << opt_str(s["kind"]) << "] " << opt_str(s["description"]) << "\n";
        }
        break;
      case EventKind::SubtaskStart:
        expanded = rejects = max_depth = 0;
        o << "subtask '" << opt_str(p["subtask"]["description"]) << "' attempt " << p["attempt"].dump() << "\n";
        if (p["subtask_reflection"].is_string()) o << "  subtask reflection: " << opt_str(p["subtask_reflection"]) << "\n";
        break;
      case EventKind::Expanded:
        ++expanded;
        max_depth = std::max(max_depth, p.value("depth", 0));
        break;
      case EventKind::VerifierReject:
        ++rejects;
        break;
      case EventKind::SubtaskEnd: {
        o << "  status: " << opt_str(p.value("status", json())) << "  complete: "
          << (p.value("complete", false) ? "yes" : "no") << "\n";
        if (p.contains("expansions")) {
          o << "  tree: " << expanded << " expansions, max depth " << max_depth << ", " << rejects
            << " verifier rejections\n";
        }
        if (p.contains("scrolls_used")) o << "  scrolls: " << p["scrolls_used"].dump() << "\n";
        std::string acts;
        for (const auto& a : p.value("actions", json::array())) acts += (acts.empty() ? "" : ", ") + opt_str(a);
        o << "  actions: " << (acts.empty() ? "(none)" : acts) << "\n";
        if (p.contains("assessment")) o << "  assessment: " << opt_str(p["assessment"]) << "\n";
        break;
      }
      case EventKind::PlanRefined:
        if (p["before"].size() != p["after"].size()) {
          o << "plan refined: " << p["before"].size() << " pending -> " << p["after"].size() << " pending\n";
        }
        break;
      case EventKind::Eval:
        o << "eval: " << (p.value("success", false) ? "success" : "failure");
        if (p["answer"].is_string()) o << "  answer: " << opt_str(p["answer"]);
        o << "  expansions: " << p.value("expansions", 0) << "\n";
        break;
      default:
        break;
    }
  }
  return o.str();
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-search web agent over simulated worlds"};
  app.require_subcommand(1);
  RunRequest req;
  std::optional<std::string> trace_out;
  std::optional<std::string> report_out;
  std::optional<std::string> tree_out;
  std::string trace_in;
  std::optional<std::string> replay_config;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--world", req.world, "World file or directory")->required();
    sub->add_option("--task", req.task, "Task id inside the world")->required();
    sub->add_option("--oracles", req.oracles, "scripted | remote | mixed:<role>=remote,...");
    sub->add_option("--config", req.config, "JSON config file");
    sub->add_option("--trace", trace_out, "Where to write the JSONL trace");
    sub->add_option("--backprop", req.backprop, "max | average")->check(CLI::IsMember({"max", "average"}));
    sub->add_option("--selection", req.selection, "gos | classic-uct")->check(CLI::IsMember({"gos", "classic-uct"}));
    sub->add_option("--seed-arm", req.seed_arm, "parent | zero")->check(CLI::IsMember({"parent", "zero"}));
    sub->add_option("--prompts", req.prompts, "Prompt template directory for remote roles");
  };
  CLI::App* run = app.add_subcommand("run", "Plan and solve a task");
  add_run_flags(run);
  run->add_option("--report", report_out, "Also write the report to this file");
  CLI::App* search = app.add_subcommand("search", "Run the tree search for one subtask and dump the tree");
  add_run_flags(search);
  search->add_option("--subtask", req.subtask, "Index of the subtask in the scripted plan");
  search->add_option("--tree", tree_out, "Write the tree dump to this file instead of stdout");
  CLI::App* replay = app.add_subcommand("replay", "Re-execute a trace and compare the event streams");
  replay->add_option("trace", trace_in, "Trace file")->required();
  replay->add_option("--config", replay_config, "Config the replay must match");
  CLI::App* report = app.add_subcommand("report", "Summarize a trace");
  report->add_option("trace", trace_in, "Trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed() || search->parsed()) {
      req.command = run->parsed() ? "run" : "search";
      const json manifest = build_manifest(req);
      Execution ex = execute(manifest);
      const fs::path trace_path =
          trace_out ? fs::path(*trace_out) : fs::path("traces") / (req.task + "-" + manifest_run_id(manifest) + ".jsonl");
      write_trace_file(trace_path, manifest, ex.tracer.events());
      if (run->parsed()) {
        const std::string text = render_report(manifest, ex.tracer.events());
        out << text;
        if (report_out) {
          std::ofstream f(*report_out);
          if (!f) throw Error(ErrorCode::IoError, "cannot write '" + *report_out + "'");
          f << text;
        }
      } else if (tree_out) {
        std::ofstream f(*tree_out);
        if (!f) throw Error(ErrorCode::IoError, "cannot write '" + *tree_out + "'");
        f << ex.tree.dump(2) << "\n";
        out << "expansions: " << ex.tree["expansions"] << "  status: " << opt_str(ex.tree["status"]) << "\n";
      } else {
        out << ex.tree.dump(2) << "\n";
      }
      out << "trace: " << trace_path.string() << "\n";
      return ex.exit_code;
    }
    if (replay->parsed()) {
      std::optional<SearchConfig> cfg;
      if (replay_config) cfg = parse_json_file(*replay_config).get<SearchConfig>();
      const ReplayVerdict v = replay_trace(trace_in, cfg);
      out << v.text() << "\n";
      if (!v.identical) err << v.detail << "\n";
      return v.identical ? 0 : 1;
    }
    const TraceFile tf = read_trace_file(trace_in);
    std::vector<TraceEvent> events;
    for (const auto& line : tf.event_lines) events.push_back(parse_event_line(line));
    out << render_report(tf.manifest, events);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace wayfinder
