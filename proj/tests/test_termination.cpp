#include <gtest/gtest.h>

#include "fbench/termination.hpp"

using namespace fbench;

namespace {

TerminationHistory still(int idle_actions) {
  TerminationHistory h;
  h.ee_positions.assign(idle_actions + 1, Vec3(0, 0, 0.2));  // reset + one per action
  h.total_steps = idle_actions;
  return h;
}

}  // namespace

TEST(Termination, WindowIsFiftyAtTenHertz) { EXPECT_EQ(TerminationConfig{}.no_motion_window(10.0), 50); }

TEST(Termination, NoMotionAtExactlyFifty) {
  const TerminationConfig cfg;
  EXPECT_FALSE(check_termination(still(49), cfg).has_value());
  EXPECT_EQ(check_termination(still(50), cfg), TerminationCause::NoMotion);
}

TEST(Termination, SubMillimetreDriftStillCountsAsIdle) {
  const TerminationConfig cfg;
  TerminationHistory h = still(50);
  for (std::size_t i = 0; i < h.ee_positions.size(); ++i) h.ee_positions[i].x() += 0.0009 * (i % 2);
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::NoMotion);
  h.ee_positions.back().x() += 0.002;
  EXPECT_FALSE(check_termination(h, cfg).has_value());
}

TEST(Termination, MotionInsideWindowResets) {
  const TerminationConfig cfg;
  TerminationHistory h = still(60);
  h.ee_positions[20].z() += 0.01;  // movement 40 actions ago
  EXPECT_FALSE(check_termination(h, cfg).has_value());
}

TEST(Termination, Unsafe) {
  const TerminationConfig cfg;
  TerminationHistory h;
  h.ee_positions = {Vec3(0, 0, 0.2), Vec3(0, 0, -0.5)};
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::Unsafe);
  h.ee_positions.back() = Vec3(0.46, 0, 0.2);
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::Unsafe);
  h.ee_positions.back() = Vec3(0.44, 0, 0.2);
  EXPECT_FALSE(check_termination(h, cfg).has_value());
}

TEST(Termination, MaxSkillAfter350) {
  const TerminationConfig cfg;
  TerminationHistory h;
  h.ee_positions = {Vec3(0, 0, 0.2), Vec3(0, 0, 0.21)};
  h.steps_in_skill = 350;
  EXPECT_FALSE(check_termination(h, cfg).has_value());
  h.steps_in_skill = 351;
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::MaxSkill);
}

TEST(Termination, MaxTotalAt3000) {
  const TerminationConfig cfg;
  TerminationHistory h;
  h.ee_positions = {Vec3(0, 0, 0.2), Vec3(0, 0, 0.21)};
  h.total_steps = 2999;
  EXPECT_FALSE(check_termination(h, cfg).has_value());
  h.total_steps = 3000;
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::MaxTotal);
}

TEST(Termination, PriorityOrder) {
  const TerminationConfig cfg;
  TerminationHistory h = still(50);
  h.ee_positions.assign(51, Vec3(0, 0, -1.0));  // idle and unsafe
  h.steps_in_skill = 400;
  h.total_steps = 5000;
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::NoMotion);
  h.ee_positions.back().z() = -0.9;
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::Unsafe);
  h.ee_positions.back() = Vec3(0, 0, 0.3);
  EXPECT_EQ(check_termination(h, cfg), TerminationCause::MaxSkill);
}

TEST(Termination, Validation) {
  TerminationConfig cfg;
  cfg.max_steps_total = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.unsafe_bounds.max.z() = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
