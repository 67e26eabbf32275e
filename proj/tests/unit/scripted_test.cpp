#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wayfinder/error.hpp"
#include "wayfinder/scripted.hpp"

using namespace wayfinder;

namespace {

struct Roles {
  std::shared_ptr<const WorldSpec> world;
  std::shared_ptr<ScriptContext> ctx;
  Environment env;

  explicit Roles(const std::string& name)
      : world(testutil::bundled(name)),
        ctx(std::make_shared<ScriptContext>(world, ScriptedPolicy::from_json(world->scripted))),
        env(world) {}

  Subtask subtask(const std::string& task, std::size_t i = 0) const {
    return ctx->policy().plans.at(task).at(i).subtask;
  }
  Step walk(std::vector<Action> actions) const {
    Step s = env.reset();
    for (const auto& a : actions) s = env.apply(s.snapshot, a);
    return s;
  }
};

Proposal propose(Explorer& ex, const Observation& obs, const Subtask& s, const ReflectionBundle& r = {},
                 int expansion_index = 5) {
  const std::optional<std::string> cont;
  return ex.propose({obs, s, {}, r, cont, {}, expansion_index, false});
}

}  // namespace

TEST(ScriptedExplorer, InviteRuleOnMembersPage) {
  Roles r("invite-member");
  ScriptedExplorer ex(r.ctx);
  const Proposal p = propose(ex, r.walk({Action::click(2)}).observation, r.subtask("invite-abishek", 1));
  EXPECT_EQ(p.action, Action::click(10));
  EXPECT_NE(p.intent.text.find("invite dialog"), std::string::npos);
}

TEST(ScriptedExplorer, NoiseDecoyThenCondemnedDecoyIsNotReproposed) {
  Roles r("invite-member");
  ScriptedExplorer ex(r.ctx);
  const Observation start = r.walk({}).observation;
  const Subtask s = r.subtask("invite-abishek", 0);
  EXPECT_EQ(propose(ex, start, s, {}, 0).action, Action::click(3));
  ReflectionBundle b;
  b.sibling = "avoid click [3]: it led to the 'Files' page";
  EXPECT_NE(propose(ex, start, s, b, 0).action, Action::click(3));
}

TEST(ScriptedExplorer, HonoringDisabledIgnoresReflections) {
  Roles r("statictext-trap");
  r.ctx->policy().honor_reflections = false;
  ScriptedExplorer ex(r.ctx);
  ReflectionBundle b;
  b.sibling = "avoid click [1]: nothing happened";
  EXPECT_EQ(propose(ex, r.walk({}).observation, r.subtask("open-project-a"), b).action, Action::click(1));
}

TEST(ScriptedExplorer, ParentReflectionIsPromoted) {
  Roles r("statictext-trap");
  ScriptedExplorer ex(r.ctx);
  ReflectionBundle b;
  b.parent = "next, do click [3]: check elsewhere";
  EXPECT_EQ(propose(ex, r.walk({}).observation, r.subtask("open-project-a"), b).action, Action::click(3));
}

TEST(ScriptedExplorer, EmptyRuleTableIsNoProposal) {
  Roles r("statictext-trap");
  r.ctx->policy().rules.clear();
  ScriptedExplorer ex(r.ctx);
  try {
    propose(ex, r.walk({}).observation, r.subtask("open-project-a"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoProposal);
  }
}

TEST(ScriptedExplorer, AssessEffect) {
  Roles r("invite-member");
  ScriptedExplorer ex(r.ctx);
  const Step members = r.walk({Action::click(2)});
  EXPECT_FALSE(ex.assess_effect(members.observation, members.observation, Intent{"anything"}).intent_achieved);
  const Step dialog = r.walk({Action::click(2), Action::click(10)});
  const Effect opened = ex.assess_effect(members.observation, dialog.observation,
                                         Intent{"open the dropdown with 'Username or email'"});
  EXPECT_EQ(opened.kind, EffectKind::InPlaceChange);
  EXPECT_TRUE(opened.intent_achieved);
  EXPECT_FALSE(ex.assess_effect(members.observation, dialog.observation, Intent{"reveal 'Something else'"})
                   .intent_achieved);
  const Effect nav = ex.assess_effect(r.walk({}).observation, members.observation, Intent{"open 'Project members'"});
  EXPECT_EQ(nav.kind, EffectKind::NewPage);
  EXPECT_TRUE(nav.intent_achieved);
}

TEST(ScriptedExplorer, ReflectionForms) {
  Roles r("invite-member");
  ScriptedExplorer ex(r.ctx);
  const Subtask invite = r.subtask("invite-abishek", 1);
  const Step dialog = r.walk({Action::click(2), Action::click(10)});
  const Step typed = r.env.apply(dialog.snapshot, Action::type(11, "Abishek"));
  const Action type = Action::type(11, "Abishek");
  const Intent intent{"type so that 'Abishek S' is offered"};
  const Effect e = ex.assess_effect(dialog.observation, typed.observation, intent);
  const std::vector<Action> history{Action::click(10)};
  const Reflections refl = ex.reflect({e, invite, type, intent, dialog.observation, typed.observation, history});
  EXPECT_EQ(refl.child.rfind("next, do click [12]", 0), 0u);
  EXPECT_EQ(refl.sibling.rfind("continue past type [11] [Abishek]", 0), 0u);

  const Step start = r.walk({});
  const Step files = r.env.apply(start.snapshot, Action::click(3));
  const Subtask nav = r.subtask("invite-abishek", 0);
  const Action click3 = Action::click(3);
  const Intent look{"look for 'Members' in the repository files"};
  const Effect fe = ex.assess_effect(start.observation, files.observation, look);
  const Reflections wrong = ex.reflect({fe, nav, click3, look, start.observation, files.observation, {}});
  EXPECT_EQ(wrong.sibling.rfind("avoid click [3]", 0), 0u);
  EXPECT_NE(wrong.sibling.find("Files"), std::string::npos);
  EXPECT_EQ(wrong.child.rfind("next, do click [2]", 0), 0u);
}

TEST(ScriptedAppraiser, Scores) {
  Roles r("invite-member");
  ScriptedExplorer ex(r.ctx);
  ScriptedAppraiser ap(r.ctx);
  const Subtask invite = r.subtask("invite-abishek", 1);
  const Step dialog = r.walk({Action::click(2), Action::click(10)});
  const Step typed = r.env.apply(dialog.snapshot, Action::type(11, "Abishek"));
  const Action type = Action::type(11, "Abishek");
  const Effect e = ex.assess_effect(dialog.observation, typed.observation, Intent{"so that 'Abishek S' is offered"});
  const Appraisal a = ap.score({e, type, dialog.observation, typed.observation, invite});
  EXPECT_EQ(a.s_eff, 9);
  EXPECT_EQ(a.s_fut, 8);

  const Step done = r.env.apply(typed.snapshot, Action::click(12));
  const Effect fin = ex.assess_effect(typed.observation, done.observation, Intent{"so 'Abishek S (Guest)' joins"});
  EXPECT_EQ(ap.score({fin, Action::click(12), typed.observation, done.observation, invite}).s_fut, 10);

  Roles t("statictext-trap");
  ScriptedExplorer tex(t.ctx);
  ScriptedAppraiser tap(t.ctx);
  const Step root = t.walk({});
  const Step same = t.env.apply(root.snapshot, Action::click(1));
  const Effect inert = tex.assess_effect(root.observation, same.observation, Intent{"open 'Project A'"});
  const Appraisal ia = tap.score({inert, Action::click(1), root.observation, same.observation,
                                  t.subtask("open-project-a")});
  EXPECT_EQ(ia.s_eff, 2);
  const Step real = t.env.apply(root.snapshot, Action::click(3));
  const Effect moved = tex.assess_effect(root.observation, real.observation, Intent{"open 'Project B'"});
  const Appraisal before_fut = tap.score({moved, Action::click(3), real.observation, root.observation,
                                          t.subtask("open-project-a")});
  EXPECT_EQ(ia.s_fut, before_fut.s_fut);
}

TEST(ScriptedController, Decide) {
  Roles r("invite-member");
  ScriptedController c(r.ctx);
  const Subtask invite = r.subtask("invite-abishek", 1);
  const Step dialog = r.walk({Action::click(2), Action::click(10)});
  const ContinuationDecision d = c.decide(invite, std::vector<Action>{Action::click(10)}, dialog.observation);
  EXPECT_FALSE(d.stop);
  EXPECT_NE(d.reason.find("type"), std::string::npos);
  EXPECT_FALSE(c.decide(invite, {}, r.walk({Action::click(2)}).observation).stop);

  Roles p("gitlab-pages");
  ScriptedController pc(p.ctx);
  const Subtask pages = p.subtask("pages-nav");
  EXPECT_EQ(pages.description, "Navigate to the 'Pages' site");
  EXPECT_TRUE(pc.decide(pages, {}, p.walk({Action::click(1), Action::click(11)}).observation).stop);
}

TEST(ScriptedController, Assess) {
  Roles r("retry-required");
  ScriptedController c(r.ctx);
  const Subtask s = r.subtask("open-order-report");
  const std::vector<Action> good{Action::click(1), Action::click(3)};
  const CompletenessVerdict ok = c.assess(s, good, r.walk(good).observation);
  EXPECT_TRUE(ok.completeness.complete);
  EXPECT_FALSE(ok.subtask_reflection);
  const std::vector<Action> bad{Action::click(1), Action::click(2)};
  const Observation tax = r.walk(bad).observation;
  EXPECT_TRUE(c.decide(s, bad, tax).stop);
  const CompletenessVerdict no = c.assess(s, bad, tax);
  EXPECT_FALSE(no.completeness.complete);
  ASSERT_TRUE(no.subtask_reflection);
  EXPECT_NE(no.subtask_reflection->find("avoid click [2]"), std::string::npos);
  EXPECT_NE(no.subtask_reflection->find("order report"), std::string::npos);
}

TEST(RuleVerifier, Checks) {
  Roles r("gitlab-pages");
  RuleVerifier v;
  const Observation obs = r.walk({}).observation;
  const std::vector<Action> siblings{Action::click(1)};
  const Verdict dup = v.check(Action::click(1), siblings, obs);
  EXPECT_FALSE(dup.accept);
  EXPECT_EQ(dup.reason, "duplicate");
  const Verdict missing = v.check(Action::click(77), {}, obs);
  EXPECT_FALSE(missing.accept);
  EXPECT_EQ(missing.reason, "invalid element");
  EXPECT_TRUE(v.check(Action::click(2), siblings, obs).accept);
  EXPECT_FALSE(v.check(Action::type(1, "x"), {}, obs).accept);
  EXPECT_FALSE(v.check(Action::click(4), {}, obs).accept);
  EXPECT_TRUE(v.check(Action::scroll(ScrollDirection::Down), {}, obs).accept);
}

TEST(ScriptedExtractor, Steps) {
  Roles r("scroll-extraction");
  ScriptedExtractor x(r.ctx);
  const Subtask s = r.subtask("one-star-reviewer");
  const ExtractorStep first = x.step(s, r.walk({}).observation);
  EXPECT_FALSE(first.answer);
  EXPECT_EQ(first.scroll, ScrollDirection::Down);
  const auto down = Action::scroll(ScrollDirection::Down);
  EXPECT_EQ(x.step(s, r.walk({down, down}).observation).answer, std::optional<std::string>("Ana"));

  Roles o("order-extraction");
  ScriptedExtractor ox(o.ctx);
  const Observation found = o.walk({Action::click(3), Action::type(30, "2137418080")}).observation;
  EXPECT_EQ(ox.step(o.subtask("customer-by-phone", 2), found).answer,
            std::optional<std::string>("Grace Nguyen, grace.nguyen@example.com"));
}

TEST(ScriptedPlanner, DecomposeAndRefine) {
  Roles r("merge-requests-shortcut");
  ScriptedPlanner p(r.ctx);
  const TaskSpec& task = *r.world->find_task("my-merge-requests");
  const Plan plan = p.decompose(task.task, r.walk({}).observation, "");
  ASSERT_EQ(plan.pending.size(), 2u);
  const std::vector<Subtask> rest(plan.pending.begin() + 1, plan.pending.end());
  EXPECT_TRUE(p.refine(task.task, rest, {true, "done"}, r.walk({Action::click(1)}).observation).empty());
  EXPECT_EQ(p.refine(task.task, rest, {true, "done"}, r.walk({Action::click(2), Action::click(10)}).observation).size(),
            1u);
  Task unknown{"nope", "?", ""};
  try {
    p.decompose(unknown, r.walk({}).observation, "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlannerError);
  }
}

TEST(ScriptedPolicy, BadAnnotationsAreParseErrors) {
  try {
    ScriptedPolicy::from_json(nlohmann::json{{"rules", {{{"propose", {{{"action", "jump"}, {"intent", "x"}}}}}}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::ParseError || e.code() == ErrorCode::MalformedAction);
  }
}

TEST(ActionsAfter, ExtractsByVerb) {
  const auto a = actions_after("avoid click [3]: x\ncontinue past type [4] [a b]: y\navoid scroll [down]", "avoid");
  EXPECT_EQ(a, (std::vector<Action>{Action::click(3), Action::scroll(ScrollDirection::Down)}));
  EXPECT_EQ(actions_after("continue past type [4] [a b]: y", "continue past"),
            std::vector<Action>{Action::type(4, "a b")});
}
