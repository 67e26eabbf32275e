#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "wayfinder/error.hpp"
#include "wayfinder/oracles.hpp"

using namespace wayfinder;

namespace {

std::vector<std::string> bundled_worlds() {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(testutil::kWorlds)) {
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

Action random_action(std::mt19937& rng, const Observation& obs) {
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<int> wild(0, 60);
  const int k = kind(rng);
  if (k == 0) return Action::scroll(rng() % 2 ? ScrollDirection::Down : ScrollDirection::Up);
  int id = wild(rng);
  if (k > 2 && !obs.elements.empty()) id = obs.elements[rng() % obs.elements.size()].id;
  if (k >= 7) return Action::type(id, rng() % 2 ? "Abishek" : "2137418080");
  return Action::click(id);
}

}  // namespace

// Anything the rule verifier accepts must be applicable in the simulator, and
// structural rejections must also fail there.
TEST(VerifierProperty, AcceptedActionsApply) {
  std::mt19937 rng(20240611);
  RuleVerifier verifier;
  std::size_t accepted = 0;
  for (const auto& name : bundled_worlds()) {
    const Environment env(testutil::bundled(name));
    for (int walk = 0; walk < 20; ++walk) {
      Step s = env.reset();
      std::vector<Action> siblings;
      for (int i = 0; i < 30; ++i) {
        const Action a = random_action(rng, s.observation);
        const Verdict v = verifier.check(a, siblings, s.observation);
        if (!v.accept) {
          if (v.reason == "invalid element" || v.reason == "not a textbox") {
            EXPECT_THROW(env.apply(s.snapshot, a), Error) << name << ": " << serialize_action(a);
          }
          continue;
        }
        ++accepted;
        ASSERT_NO_THROW(s = env.apply(s.snapshot, a)) << name << ": " << serialize_action(a);
        siblings.clear();
      }
    }
  }
  EXPECT_GT(accepted, 500u);
}

// Restoring a snapshot and replaying the same suffix reproduces every observation.
TEST(EnvironmentProperty, RestoreIsDeterministic) {
  std::mt19937 rng(7);
  RuleVerifier verifier;
  for (const auto& name : bundled_worlds()) {
    const Environment env(testutil::bundled(name));
    for (int walk = 0; walk < 10; ++walk) {
      std::vector<Step> steps{env.reset()};
      std::vector<Action> taken;
      while (taken.size() < 12) {
        const Action a = random_action(rng, steps.back().observation);
        if (!verifier.check(a, {}, steps.back().observation).accept) continue;
        taken.push_back(a);
        steps.push_back(env.apply(steps.back().snapshot, a));
      }
      const std::size_t cut = rng() % taken.size();
      Step again{env.restore(steps[cut].snapshot), env.observe(steps[cut].snapshot)};
      EXPECT_EQ(again.observation, steps[cut].observation);
      for (std::size_t i = cut; i < taken.size(); ++i) {
        again = env.apply(again.snapshot, taken[i]);
        ASSERT_EQ(again.observation, steps[i + 1].observation) << name << " step " << i;
        EXPECT_EQ(again.snapshot.state(), steps[i + 1].snapshot.state());
      }
    }
  }
}
