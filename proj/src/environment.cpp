#include "wayfinder/environment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>

#include "wayfinder/error.hpp"

namespace wayfinder {

namespace {

std::atomic<std::uint64_t> g_next_instance{1};

std::string interpolate(const std::string& text, const VariableMap& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find("{{", pos);
    if (open == std::string::npos) break;
    auto close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(text, pos, open - pos);
    auto it = vars.find(text.substr(open + 2, close - open - 2));
    if (it != vars.end()) out += it->second;
    pos = close + 2;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

bool vars_match(const VariableMap& required, const VariableMap& actual) {
  return std::all_of(required.begin(), required.end(), [&](const auto& kv) {
    auto it = actual.find(kv.first);
    const std::string& have = it == actual.end() ? std::string() : it->second;
    return have == kv.second;
  });
}

std::string quoted_list(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += ", ";
    out += "'" + l + "'";
  }
  return out;
}

}  // namespace

std::string encode_state_key(const EnvState& state) {
  nlohmann::json j{{"page", state.page},
                   {"window", state.window},
                   {"revealed", state.revealed},
                   {"concealed", state.concealed},
                   {"vars", state.variables}};
  return j.dump();
}

EnvState decode_state_key(std::string_view key) {
  try {
    auto j = nlohmann::json::parse(key);
    EnvState s;
    s.page = j.at("page").get<std::string>();
    s.window = j.at("window").get<int>();
    s.revealed = j.at("revealed").get<std::set<int>>();
    s.concealed = j.at("concealed").get<std::set<int>>();
    s.variables = j.at("vars").get<VariableMap>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad state key: ") + e.what());
  }
}

Environment::Environment(std::shared_ptr<const WorldSpec> world)
    : world_(std::move(world)), instance_(g_next_instance.fetch_add(1)) {}

void Environment::check_owned(const EnvSnapshot& snapshot) const {
  if (snapshot.instance_ != instance_) {
    throw Error(ErrorCode::StaleSnapshot, "snapshot belongs to environment instance " +
                                              std::to_string(snapshot.instance_) + ", not " +
                                              std::to_string(instance_));
  }
}

Step Environment::reset() const {
  EnvState s;
  s.page = world_->start_page;
  s.variables = world_->variables;
  EnvSnapshot snap(instance_, std::move(s));
  auto obs = render(snap.state_);
  return {std::move(snap), std::move(obs)};
}

EnvSnapshot Environment::restore(const EnvSnapshot& snapshot) const {
  check_owned(snapshot);
  return snapshot;
}

EnvSnapshot Environment::snapshot_of(EnvState state) const {
  world_->page(state.page);
  return EnvSnapshot(instance_, std::move(state));
}

Observation Environment::observe(const EnvSnapshot& snapshot) const {
  check_owned(snapshot);
  return render(snapshot.state_);
}

bool Environment::visible(const ElementSpec& e, const EnvState& state) const {
  if (e.hidden && !state.revealed.contains(e.id)) return false;
  if (state.concealed.contains(e.id)) return false;
  if (!vars_match(e.visible_when, state.variables)) return false;
  return e.sticky || e.window == state.window;
}

Observation Environment::render(const EnvState& state) const {
  const PageSpec& page = world_->page(state.page);
  Observation obs;
  obs.base_url = page.base_url;
  obs.title = page.title;
  obs.window = state.window;
  obs.window_count = page.scroll_windows;
  obs.state_key = encode_state_key(state);
  std::string tree = "RootWebArea '" + page.title + "' url: " + page.base_url + "\n";
  for (const auto& e : page.elements) {
    if (!visible(e, state)) continue;
    ElementView v{e.id, e.role, e.label, e.interactive(), {}};
    tree += "\t[" + std::to_string(e.id) + "] " + std::string(to_string(e.role)) + " '" + e.label + "'";
    if (e.accepts_text()) {
      auto it = state.variables.find(e.binds);
      if (it != state.variables.end()) v.value = it->second;
      tree += " value: '" + v.value + "'";
    }
    tree += "\n";
    obs.elements.push_back(std::move(v));
  }
  if (page.scroll_windows > 1) {
    tree += "(scroll window " + std::to_string(state.window + 1) + " of " + std::to_string(page.scroll_windows) +
            ")\n";
  }
  obs.actree = std::move(tree);
  return obs;
}

void Environment::fire(const Transition& t, EnvState& state) const {
  if (t.no_effect || !vars_match(t.requires_vars, state.variables)) return;
  VariableMap updates;
  for (const auto& [k, v] : t.set) updates[k] = interpolate(v, state.variables);
  for (auto& [k, v] : updates) state.variables[k] = std::move(v);
  for (int id : t.reveal) {
    state.revealed.insert(id);
    state.concealed.erase(id);
  }
  for (int id : t.hide) {
    state.concealed.insert(id);
    state.revealed.erase(id);
  }
  if (t.goto_page) {
    state.page = *t.goto_page;
    state.window = 0;
    state.revealed.clear();
    state.concealed.clear();
  }
}

Step Environment::apply(const EnvSnapshot& snapshot, const Action& action) const {
  check_owned(snapshot);
  EnvState next = snapshot.state_;
  const PageSpec& page = world_->page(next.page);

  auto visible_element = [&](int id) -> const ElementSpec& {
    const ElementSpec* e = page.find(id);
    if (e == nullptr || !visible(*e, next)) {
      throw Error(ErrorCode::InvalidElement, "element " + std::to_string(id) + " is not in the current observation");
    }
    return *e;
  };

  if (const auto* click = std::get_if<Click>(&action.value)) {
    const ElementSpec& e = visible_element(click->element);
    if (e.on_click) fire(*e.on_click, next);
  } else if (const auto* type = std::get_if<TypeText>(&action.value)) {
    const ElementSpec& e = visible_element(type->element);
    if (!e.accepts_text()) {
      throw Error(ErrorCode::InvalidInput, "element " + std::to_string(e.id) + " is a " +
                                               std::string(to_string(e.role)) + ", not a textbox");
    }
    next.variables[e.binds] = type->text;
    if (e.on_type) fire(*e.on_type, next);
  } else if (const auto* scroll = std::get_if<Scroll>(&action.value)) {
    if (scroll->direction == ScrollDirection::Down) {
      next.window = std::min(next.window + 1, page.scroll_windows - 1);
    } else {
      next.window = std::max(next.window - 1, 0);
    }
  }
  // Stop is absorbing.
  EnvSnapshot snap(instance_, std::move(next));
  auto obs = render(snap.state_);
  return {std::move(snap), std::move(obs)};
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool evaluate(const TaskSpec& task, std::span<const Action> actions, std::span<const EnvSnapshot> states,
              const std::optional<std::string>& final_answer) {
  switch (task.eval_kind) {
    case EvalKind::StateMatch: {
      if (states.empty()) return false;
      const EnvState& last = states.back().state();
      if (!task.pages.empty() && std::find(task.pages.begin(), task.pages.end(), last.page) == task.pages.end()) {
        return false;
      }
      return vars_match(task.variables, last.variables);
    }
    case EvalKind::AnswerMatch: {
      std::optional<std::string> answer = final_answer;
      if (!answer) {
        for (auto it = actions.rbegin(); it != actions.rend(); ++it) {
          if (const auto* stop = std::get_if<Stop>(&it->value)) {
            answer = stop->answer;
            break;
          }
        }
      }
      return answer && normalize_answer(*answer) == normalize_answer(task.expected_answer);
    }
    case EvalKind::ActionTraceMatch: {
      std::size_t next = 0;
      for (const auto& a : actions) {
        if (next < task.required_actions.size() && serialize_action(a) == task.required_actions[next]) ++next;
      }
      return next == task.required_actions.size();
    }
  }
  return false;
}

Effect diff_observations(const Observation& before, const Observation& after, const Intent& intent) {
  (void)intent;
  Effect effect;
  if (before.base_url != after.base_url) {
    effect.kind = EffectKind::NewPage;
    effect.description = "What kind of page is reached? The '" + after.title + "' page (" + after.base_url + ").";
    return effect;
  }
  if (before.actree == after.actree) {
    effect.kind = EffectKind::NoChange;
    effect.description = "No visible change on the '" + after.title + "' page.";
    return effect;
  }
  effect.kind = EffectKind::InPlaceChange;
  std::map<int, const ElementView*> old_by_id;
  for (const auto& e : before.elements) old_by_id[e.id] = &e;
  auto& updated = effect.updated_labels;
  for (const auto& e : after.elements) {
    auto it = old_by_id.find(e.id);
    if (it == old_by_id.end() || it->second->label != e.label || it->second->role != e.role) {
      effect.added_labels.push_back(e.label);
    } else if (it->second->value != e.value) {
      updated.push_back(e.label);
    }
    if (it != old_by_id.end()) old_by_id.erase(it);
  }
  for (const auto& e : before.elements) {
    if (old_by_id.contains(e.id)) effect.removed_labels.push_back(e.label);
  }
  std::string desc = "What elements have changed? On the '" + after.title + "' page";
  if (!effect.added_labels.empty()) desc += "; appeared: " + quoted_list(effect.added_labels);
  if (!effect.removed_labels.empty()) desc += "; disappeared: " + quoted_list(effect.removed_labels);
  if (!updated.empty()) desc += "; updated: " + quoted_list(updated);
  if (effect.added_labels.empty() && effect.removed_labels.empty() && updated.empty()) desc += "; layout changed";
  effect.description = desc + ".";
  return effect;
}

}  // namespace wayfinder
