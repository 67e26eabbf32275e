#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wayfinder/error.hpp"
#include "wayfinder/global_optimizer.hpp"
#include "wayfinder/scripted.hpp"

using namespace wayfinder;

namespace {

const char* kTwoSubtasks = R"({
  "start_page": "a",
  "pages": {
    "a": {"base_url": "http://x/a", "title": "A", "elements": [{"id": 1, "role": "link", "label": "Go", "on_click": {"goto": "b"}}]},
    "b": {"base_url": "http://x/b", "title": "B", "elements": [{"id": 2, "role": "link", "label": "Back", "on_click": {"goto": "a"}}]},
    "c": {"base_url": "http://x/c", "title": "C", "elements": []}
  },
  "tasks": [{"id": "go", "goal": "reach C then B", "eval": {"kind": "state_match", "pages": ["b"]}}],
  "scripted": {
    "plans": {"go": [{"description": "Open C", "goal": {"pages": ["c"]}},
                     {"description": "Open B", "goal": {"pages": ["b"]}}]},
    "rules": [{"page": "a", "propose": [{"action": "click [1]", "intent": "open 'B'"}]},
              {"page": "b", "propose": [{"action": "click [2]", "intent": "go back"}]}]
  }
})";

struct Runner {
  std::shared_ptr<const WorldSpec> world;
  Environment env;
  OracleSuite suite;
  SearchConfig cfg;
  Tracer tracer{"g"};

  explicit Runner(std::shared_ptr<const WorldSpec> w) : world(w), env(w), suite(make_scripted_suite(w)) {}

  RunResult run(const std::string& task) {
    GlobalOptimizer g(env, suite, cfg, tracer);
    return g.run_task(*world->find_task(task), "");
  }
};

class EmptyPlanner final : public Planner {
 public:
  Plan decompose(const Task&, const Observation&, const std::string&) override { return {}; }
  std::deque<Subtask> refine(const Task&, std::span<const Subtask>, const Completeness&, const Observation&) override {
    return {};
  }
};

}  // namespace

TEST(RunTask, InviteMemberEndToEnd) {
  Runner r(testutil::bundled("invite-member"));
  const RunResult res = r.run("invite-abishek");
  EXPECT_TRUE(res.success);
  ASSERT_EQ(res.subtask_log.size(), 2u);
  EXPECT_EQ(res.total_expansions, 5);
  EXPECT_EQ(res.actions.back(), Action::click(12));
  EXPECT_EQ(res.actions.size(), res.states.size());
  EXPECT_EQ(r.tracer.events().back().kind, EventKind::Eval);
}

TEST(RunTask, RefinementDropsSatisfiedSubtask) {
  Runner r(testutil::bundled("plan-refinement-drop"));
  const RunResult res = r.run(r.world->tasks.front().task.id);
  EXPECT_TRUE(res.success);
  EXPECT_EQ(res.subtask_log.size(), 2u);
  for (const auto& s : res.subtask_log) EXPECT_NE(s.subtask.description, "Open the 'Yoga Mat' product page");
  EXPECT_GE(r.tracer.count(EventKind::PlanRefined), 1u);
}

TEST(RunTask, ShortcutLeavesNothingToRefine) {
  Runner r(testutil::bundled("merge-requests-shortcut"));
  const RunResult res = r.run("my-merge-requests");
  EXPECT_TRUE(res.success);
  EXPECT_EQ(res.subtask_log.size(), 1u);
  EXPECT_EQ(res.total_expansions, 1);
}

TEST(RunTask, RetryStartsFromCheckpointWithSubtaskReflection) {
  Runner r(testutil::bundled("retry-required"));
  const RunResult res = r.run("open-order-report");
  EXPECT_TRUE(res.success);
  ASSERT_EQ(res.subtask_log.size(), 1u);
  const SubtaskRecord& rec = res.subtask_log[0];
  ASSERT_EQ(rec.attempts, 2);
  EXPECT_FALSE(rec.history[0].subtask_reflection_in);
  EXPECT_FALSE(rec.history[0].completeness.complete);
  ASSERT_TRUE(rec.history[1].subtask_reflection_in);
  EXPECT_NE(rec.history[1].subtask_reflection_in->find("avoid click [2]"), std::string::npos);
  EXPECT_EQ(rec.history[0].root_actree, rec.history[1].root_actree);
  // Only the successful attempt is committed.
  EXPECT_EQ(res.actions, (std::vector<Action>{Action::click(1), Action::click(3)}));
}

TEST(RunExtraction, ScrollCounts) {
  Runner r(testutil::bundled("scroll-extraction"));
  GlobalOptimizer g(r.env, r.suite, r.cfg, r.tracer);
  const Step start = r.env.reset();
  const auto policy = ScriptedPolicy::from_json(r.world->scripted);
  const ExtractionResult found = g.run_extraction(policy.plans.at("one-star-reviewer").at(0).subtask, start.snapshot,
                                                  start.observation);
  EXPECT_EQ(found.answer, std::optional<std::string>("Ana"));
  EXPECT_EQ(found.scrolls_used, 2);
  EXPECT_EQ(found.final_observation.window, 2);
  const ExtractionResult missing = g.run_extraction(policy.plans.at("three-star-reviewer").at(0).subtask,
                                                    start.snapshot, start.observation);
  EXPECT_FALSE(missing.answer);
  EXPECT_EQ(missing.scrolls_used, r.cfg.n_scroll_max);
  EXPECT_EQ(missing.actions.size(), 5u);
}

TEST(RunExtraction, AnswerOnFirstScreenUsesNoScroll) {
  Runner r(testutil::bundled("multi-subtask-long-horizon"));
  const RunResult res = r.run(r.world->tasks.front().task.id);
  EXPECT_TRUE(res.success);
  EXPECT_EQ(res.answer, std::optional<std::string>("$1,234.56"));
  EXPECT_EQ(res.total_expansions, 5);
  ASSERT_EQ(r.tracer.count(EventKind::ExtractionStep), 1u);
  for (const auto& e : r.tracer.events()) {
    if (e.kind == EventKind::ExtractionStep) {
      EXPECT_EQ(e.payload.at("scrolls_used"), 0);
    }
  }
}

TEST(RunTask, UnanswerableExtractionFailsEvaluation) {
  Runner r(testutil::bundled("scroll-extraction"));
  const RunResult res = r.run("three-star-reviewer");
  EXPECT_FALSE(res.success);
  EXPECT_FALSE(res.answer);
  EXPECT_EQ(res.subtask_log.back().attempts, 1);
}

TEST(FailurePolicy, AbortStopsAtFirstFailedSubtask) {
  Runner cont(testutil::inline_world(kTwoSubtasks));
  const RunResult all = cont.run("go");
  EXPECT_EQ(all.subtask_log.size(), 2u);
  EXPECT_FALSE(all.aborted);
  EXPECT_FALSE(all.subtask_log[0].completeness.complete);
  EXPECT_EQ(all.subtask_log[0].attempts, 2);

  Runner abort(testutil::inline_world(kTwoSubtasks));
  abort.cfg.failure_policy = FailurePolicy::Abort;
  const RunResult one = abort.run("go");
  EXPECT_TRUE(one.aborted);
  EXPECT_EQ(one.subtask_log.size(), 1u);
  EXPECT_FALSE(one.success);
  EXPECT_EQ(abort.tracer.events().back().payload.at("aborted"), true);
}

TEST(Decompose, EmptyPlanIsPlannerError) {
  Runner r(testutil::bundled("gitlab-pages"));
  r.suite.planner = std::make_shared<EmptyPlanner>();
  GlobalOptimizer g(r.env, r.suite, r.cfg, r.tracer);
  try {
    g.run_task(*r.world->find_task("pages-nav"), "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlannerError);
  }
  EXPECT_EQ(r.tracer.count(EventKind::PlanGenerated), 0u);
}
