#include "wayfinder/world.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ValidationError, what); }

VariableMap parse_vars(const json& j, const std::string& where) {
  VariableMap out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) throw Error(ErrorCode::ParseError, where + "." + key + " must be a string");
    out.emplace(key, value.get<std::string>());
  }
  return out;
}

std::vector<int> parse_ids(const json& j) {
  std::vector<int> out;
  if (j.is_null()) return out;
  for (const auto& v : j) out.push_back(v.get<int>());
  return out;
}

Transition parse_transition(const json& j) {
  Transition t;
  if (j.contains("goto")) t.goto_page = j.at("goto").get<std::string>();
  t.set = parse_vars(j.value("set", json()), "set");
  t.reveal = parse_ids(j.value("reveal", json()));
  t.hide = parse_ids(j.value("hide", json()));
  t.requires_vars = parse_vars(j.value("requires", json()), "requires");
  t.no_effect = j.value("no_effect", false);
  if (t.no_effect && (t.goto_page || !t.set.empty() || !t.reveal.empty() || !t.hide.empty())) {
    invalid("no_effect transition cannot carry other effects");
  }
  return t;
}

ElementSpec parse_element(const json& j, const std::string& page_id) {
  ElementSpec e;
  e.id = j.at("id").get<int>();
  e.role = parse_element_role(j.at("role").get<std::string>());
  e.label = j.at("label").get<std::string>();
  if (j.contains("on_click")) e.on_click = parse_transition(j.at("on_click"));
  if (j.contains("on_type")) e.on_type = parse_transition(j.at("on_type"));
  e.window = j.value("window", 0);
  e.sticky = j.value("sticky", false);
  e.hidden = j.value("hidden", false);
  e.visible_when = parse_vars(j.value("visible_when", json()), "visible_when");
  if (j.contains("candidates")) e.candidates = j.at("candidates").get<std::vector<std::string>>();
  if (e.accepts_text()) {
    e.binds = j.value("binds", page_id + "." + std::to_string(e.id));
  } else if (j.contains("binds") || j.contains("on_type") || j.contains("candidates")) {
    invalid("element " + std::to_string(e.id) + " on page '" + page_id + "' is not a textbox but accepts text");
  }
  return e;
}

TaskSpec parse_task(const json& j, const std::string& world_name) {
  TaskSpec t;
  t.task.id = j.at("id").get<std::string>();
  t.task.goal = j.at("goal").get<std::string>();
  t.task.world_ref = world_name;
  const json& ev = j.at("eval");
  const auto kind = ev.at("kind").get<std::string>();
  if (kind == "state_match") {
    t.eval_kind = EvalKind::StateMatch;
    if (ev.contains("pages")) t.pages = ev.at("pages").get<std::vector<std::string>>();
    t.variables = parse_vars(ev.value("variables", json()), "eval.variables");
  } else if (kind == "answer_match") {
    t.eval_kind = EvalKind::AnswerMatch;
    t.expected_answer = ev.at("expected").get<std::string>();
  } else if (kind == "action_trace_match") {
    t.eval_kind = EvalKind::ActionTraceMatch;
    t.required_actions = ev.at("actions").get<std::vector<std::string>>();
  } else {
    throw Error(ErrorCode::ParseError, "unknown eval kind '" + kind + "'");
  }
  return t;
}

void validate_world(const WorldSpec& w) {
  if (w.pages.empty()) invalid("world has no pages");
  if (!w.pages.contains(w.start_page)) invalid("start_page '" + w.start_page + "' does not exist");
  for (const auto& [pid, page] : w.pages) {
    if (page.base_url.empty()) invalid("page '" + pid + "' has an empty base_url");
    if (page.scroll_windows < 1) invalid("page '" + pid + "' needs scroll_windows >= 1");
    std::set<int> ids;
    for (const auto& e : page.elements) {
      if (!ids.insert(e.id).second) {
        invalid("duplicate element id " + std::to_string(e.id) + " on page '" + pid + "'");
      }
      if (e.window < 0 || e.window >= page.scroll_windows) {
        invalid("element " + std::to_string(e.id) + " on page '" + pid + "' lies outside the scroll windows");
      }
    }
    auto check_transition = [&](const Transition& t, int owner) {
      if (t.goto_page && !w.pages.contains(*t.goto_page)) {
        invalid("element " + std::to_string(owner) + " on page '" + pid + "' points to missing page '" +
                *t.goto_page + "'");
      }
      for (int id : t.reveal) {
        if (!ids.contains(id)) invalid("reveal of unknown element " + std::to_string(id) + " on page '" + pid + "'");
      }
      for (int id : t.hide) {
        if (!ids.contains(id)) invalid("hide of unknown element " + std::to_string(id) + " on page '" + pid + "'");
      }
    };
    for (const auto& e : page.elements) {
      if (e.on_click) check_transition(*e.on_click, e.id);
      if (e.on_type) check_transition(*e.on_type, e.id);
    }
  }
  std::set<std::string> task_ids;
  for (const auto& t : w.tasks) {
    if (t.task.goal.empty()) invalid("task '" + t.task.id + "' has an empty goal");
    if (!task_ids.insert(t.task.id).second) invalid("duplicate task id '" + t.task.id + "'");
    for (const auto& p : t.pages) {
      if (!w.pages.contains(p)) invalid("task '" + t.task.id + "' refers to missing page '" + p + "'");
    }
    for (const auto& a : t.required_actions) parse_action(a);
  }
}

}  // namespace

const ElementSpec* PageSpec::find(int element) const {
  auto it = std::find_if(elements.begin(), elements.end(), [element](const ElementSpec& e) { return e.id == element; });
  return it == elements.end() ? nullptr : &*it;
}

const PageSpec& WorldSpec::page(const std::string& id) const {
  auto it = pages.find(id);
  if (it == pages.end()) throw Error(ErrorCode::ValidationError, "unknown page '" + id + "'");
  return it->second;
}

const TaskSpec* WorldSpec::find_task(std::string_view id) const {
  auto it = std::find_if(tasks.begin(), tasks.end(), [id](const TaskSpec& t) { return t.task.id == id; });
  return it == tasks.end() ? nullptr : &*it;
}

WorldSpec load_world(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  WorldSpec w;
  try {
    w.name = root.value("name", std::string("world"));
    w.domain = root.value("domain", std::string());
    w.start_page = root.at("start_page").get<std::string>();
    w.demonstrations = root.value("demonstrations", std::string());
    w.variables = parse_vars(root.value("variables", json()), "variables");
    for (const auto& [pid, pj] : root.at("pages").items()) {
      PageSpec page;
      page.id = pid;
      page.base_url = pj.at("base_url").get<std::string>();
      page.title = pj.value("title", pid);
      page.scroll_windows = pj.value("scroll_windows", 1);
      for (const auto& ej : pj.at("elements")) page.elements.push_back(parse_element(ej, pid));
      w.pages.emplace(pid, std::move(page));
    }
    for (const auto& tj : root.value("tasks", json::array())) w.tasks.push_back(parse_task(tj, w.name));
    w.scripted = root.value("scripted", json::object());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError) throw;
    throw Error(ErrorCode::ParseError, e.what());
  }
  validate_world(w);
  return w;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path resolve_world_path(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(path)) return path;
  if (fs::is_directory(path) && fs::is_regular_file(path / "world.json")) return path / "world.json";
  fs::path with_ext = path;
  with_ext += ".json";
  if (fs::is_regular_file(with_ext)) return with_ext;
  throw Error(ErrorCode::IoError, "world not found: '" + path.string() + "'");
}

WorldSpec load_world_file(const std::filesystem::path& path) {
  return load_world(read_text_file(resolve_world_path(path)));
}

}  // namespace wayfinder
