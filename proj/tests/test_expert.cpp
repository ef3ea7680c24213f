#include <gtest/gtest.h>

#include <cmath>

#include "fbench/expert.hpp"

using namespace fbench;

namespace {

struct Outcome {
  int reward_total = 0;
  int phases = 0;
  bool success = false;
  ExpertTranscript transcript;
  std::vector<std::vector<double>> screw_trace;  // per step, per part
  double max_action = 0.0;
};

Outcome run_expert(const std::string& furniture, std::uint64_t seed, Level level = Level::Low) {
  RunConfig cfg;
  cfg.furniture = furniture;
  cfg.level = level;
  Env env(cfg);
  env.reset(seed);
  ScriptedExpert expert;
  Outcome out;
  while (!env.done()) {
    const Action a = expert.act(env);
    for (double c : a.to_array()) out.max_action = std::max(out.max_action, std::abs(c));
    const StepResult r = env.step(a);
    out.reward_total += r.reward;
    std::vector<double> angles;
    for (const PartState& p : env.world().parts) angles.push_back(p.screw_angle);
    out.screw_trace.push_back(angles);
  }
  expert.finish(env);
  out.phases = env.phase().completed;
  out.success = env.cause() == TerminationCause::Success;
  out.transcript = expert.transcript();
  return out;
}

}  // namespace

TEST(Expert, OneLegTwentySeeds) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Outcome o = run_expert("one_leg", s);
    EXPECT_TRUE(o.success) << "seed " << s;
    EXPECT_EQ(o.reward_total, 1) << "seed " << s;
    EXPECT_EQ(o.phases, 5) << "seed " << s;
  }
}

TEST(Expert, LampTwentySeeds) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Outcome o = run_expert("lamp", s);
    EXPECT_TRUE(o.success) << "seed " << s;
    EXPECT_EQ(o.reward_total, 2) << "seed " << s;
    EXPECT_EQ(o.phases, 7) << "seed " << s;
  }
}

TEST(Expert, ScrewTranscriptIsSixQuarterTurns) {
  const Outcome o = run_expert("one_leg", 3);
  ASSERT_TRUE(o.success);
  ASSERT_EQ(o.transcript.screw_segments.size(), 6u);
  for (const ScrewSegment& seg : o.transcript.screw_segments) EXPECT_NEAR(seg.accrued, kPi / 2, 1e-9);
  EXPECT_EQ(o.transcript.regrasps, 5);
}

TEST(Expert, ScrewAngleNeverDecreases) {
  for (const std::string id : {"one_leg", "lamp", "stool"}) {
    const Outcome o = run_expert(id, 1);
    for (std::size_t t = 1; t < o.screw_trace.size(); ++t)
      for (std::size_t k = 0; k < o.screw_trace[t].size(); ++k)
        ASSERT_GE(o.screw_trace[t][k], o.screw_trace[t - 1][k]) << id << " step " << t;
  }
}

TEST(Expert, ActionsStayInRange) {
  const Outcome o = run_expert("lamp", 5);
  EXPECT_LE(o.max_action, 1.0);
}

TEST(Expert, EveryBuiltinAtLow) {
  for (const std::string& id : builtin_furniture_ids()) {
    const Outcome o = run_expert(id, 0);
    EXPECT_TRUE(o.success) << id;
    EXPECT_EQ(o.reward_total, static_cast<int>(load_furniture(id).parts.size()) - 1) << id;
  }
}

TEST(Expert, MediumRandomness) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 5; ++s) ok += run_expert("one_leg", s, Level::Medium).success;
  EXPECT_EQ(ok, 5);
}
