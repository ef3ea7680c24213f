#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fbench/config.hpp"
#include "fbench/env.hpp"
#include "fbench/evaluate.hpp"
#include "fbench/expert.hpp"

using namespace fbench;

namespace {

RunConfig config_for(const std::string& furniture, Level level = Level::Low) {
  RunConfig c;
  c.furniture = furniture;
  c.level = level;
  return c;
}

Action move(double dx, double dy, double dz) {
  Action a;
  a.delta_position = Vec3(dx, dy, dz);
  return a;
}

}  // namespace

TEST(Env, ResetIsDeterministic) {
  Env a(config_for("one_leg")), b(config_for("one_leg"));
  EXPECT_EQ(a.reset(7), b.reset(7));
  EXPECT_EQ(a.world(), b.world());
  EXPECT_EQ(a.estimates().size(), b.estimates().size());
}

TEST(Env, TraceIsAPureFunctionOfSeedAndActions) {
  RunConfig cfg = config_for("one_leg");
  cfg.observation_channels.fused_part_poses = true;
  Env a(cfg), b(cfg);
  a.reset(3);
  b.reset(3);
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const Action act = move(rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03));
    const StepResult ra = a.step(act), rb = b.step(act);
    ASSERT_EQ(ra.observation, rb.observation) << i;
    ASSERT_EQ(ra.reward, rb.reward);
    ASSERT_EQ(ra.info.phase_completed, rb.info.phase_completed);
  }
  EXPECT_EQ(a.world(), b.world());
}

TEST(Env, StepAdvancesNinetyNineTicks) {
  Env env(config_for("lamp"));
  env.reset(0);
  for (int i = 1; i <= 4; ++i) {
    env.step(move(0.01, 0, 0));
    EXPECT_EQ(env.world().tick, 99 * i);
  }
}

TEST(Env, HighEvalSeedsGiveThreeLayouts) {
  RunConfig cfg = config_for("one_leg", Level::High);
  cfg.eval_mode = true;
  std::vector<std::vector<Pose>> layouts;
  for (std::uint64_t s = 0; s < 3; ++s) {
    Env env(cfg);
    env.reset(s);
    std::vector<Pose> p;
    for (const PartState& ps : env.world().parts) p.push_back(ps.pose);
    layouts.push_back(p);
  }
  EXPECT_NE(layouts[0], layouts[1]);
  EXPECT_NE(layouts[1], layouts[2]);
  EXPECT_NE(layouts[0], layouts[2]);
}

TEST(Env, UnknownFurnitureThrows) { EXPECT_THROW(Env(config_for("bogus")), FurnitureNotFound); }

TEST(Env, StepBeforeResetThrows) {
  Env env(config_for("one_leg"));
  EXPECT_THROW(env.step(Action::zero()), std::logic_error);
}

TEST(Env, ZeroActionsStopAtFiftyWithNoMotion) {
  Env env(config_for("one_leg"));
  env.reset(0);
  StepResult r;
  for (int i = 1; i <= 49; ++i) {
    r = env.step(Action::zero());
    ASSERT_FALSE(r.done) << i;
  }
  r = env.step(Action::zero());
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.info.termination_cause, TerminationCause::NoMotion);
  EXPECT_EQ(env.steps(), 50);
  try {
    env.step(Action::zero());
    FAIL() << "expected EpisodeFinished";
  } catch (const EpisodeFinished& e) {
    EXPECT_STREQ(e.what(), "episode finished");
  }
}

TEST(Env, LeavingTheBoxIsUnsafe) {
  Env env(config_for("one_leg"));
  env.reset(0);
  StepResult r;
  int n = 0;
  do {
    r = env.step(move(0.1, 0, 0));
    ++n;
  } while (!r.done && n < 20);
  EXPECT_EQ(r.info.termination_cause, TerminationCause::Unsafe);
  EXPECT_GT(env.world().ee.pose.position.x(), 0.45);
}

TEST(Env, MaxSkillAfter350StepsWithoutProgress) {
  Env env(config_for("one_leg"));
  env.reset(0);
  StepResult r;
  for (int i = 1; i <= 350; ++i) {
    r = env.step(move(0, 0, i % 2 ? 0.01 : -0.01));
    ASSERT_FALSE(r.done) << i;
  }
  r = env.step(move(0, 0, 0.01));
  EXPECT_EQ(r.info.termination_cause, TerminationCause::MaxSkill);
}

TEST(Env, MaxTotalAt3000) {
  RunConfig cfg = config_for("one_leg");
  cfg.termination.max_steps_per_skill = 100000;
  Env env(cfg);
  env.reset(0);
  StepResult r;
  for (int i = 1; i <= 2999; ++i) {
    r = env.step(move(0, 0, i % 2 ? 0.01 : -0.01));
    ASSERT_FALSE(r.done) << i;
  }
  r = env.step(move(0, 0, 0.01));
  EXPECT_EQ(r.info.termination_cause, TerminationCause::MaxTotal);
}

TEST(Env, ObservationChannelsFollowConfig) {
  Env plain(config_for("one_leg"));
  const Observation o = plain.reset(0);
  EXPECT_FALSE(o.fused_part_poses.has_value());
  EXPECT_FALSE(o.image.has_value());
  EXPECT_TRUE(o.ee_position.allFinite());

  RunConfig cfg = config_for("one_leg");
  cfg.observation_channels = {true, true};
  Env rich(cfg);
  const Observation r = rich.reset(0);
  ASSERT_TRUE(r.fused_part_poses.has_value());
  EXPECT_EQ(r.fused_part_poses->size(), 2u);
  ASSERT_TRUE(r.image.has_value());
  EXPECT_EQ(r.image->width, 224);
  EXPECT_EQ(r.image->height, 224);
}

TEST(Env, ObservationJsonRoundTripIsExact) {
  RunConfig cfg = config_for("lamp");
  cfg.observation_channels = {true, true};
  Env env(cfg);
  env.reset(4);
  const Observation o = env.step(move(0.013, -0.021, 0.007)).observation;
  const Json j = observation_to_json(o);
  const Observation back = observation_from_json(Json::parse(j.dump()), "");
  EXPECT_EQ(back, o);
  EXPECT_EQ(observation_to_json(back).dump(), j.dump());
  EXPECT_EQ(observation_deviation(o, back), 0.0);
}

TEST(Env, ExpertRunTracksPhasesAndRewards) {
  RunConfig cfg = config_for("one_leg");
  cfg.noise = NoiseModel::none();
  Env env(cfg);
  env.reset(5);
  ScriptedExpert ex;
  int last_phase = 0, total = 0;
  StepResult r;
  do {
    r = env.step(ex.act(env));
    ASSERT_GE(r.info.phase_completed, last_phase);
    last_phase = r.info.phase_completed;
    EXPECT_EQ(r.reward, r.info.ground_truth_reward) << "step " << env.steps();
    total += r.reward;
  } while (!r.done);
  EXPECT_EQ(r.info.termination_cause, TerminationCause::Success);
  EXPECT_EQ(last_phase, 5);
  EXPECT_EQ(total, 1);
}

TEST(Env, RandomEpisodesNeverExceedMaxReward) {
  for (const std::string& id : builtin_furniture_ids()) {
    RunConfig cfg = config_for(id);
    cfg.termination.max_steps_total = 15;
    const auto m = evaluate_policy(cfg, random_policy_factory(), [] {
      std::vector<std::uint64_t> s;
      for (std::uint64_t i = 0; i < 100; ++i) s.push_back(i);
      return s;
    }());
    const int n = load_furniture(id).max_reward();
    for (const EpisodeResult& e : m.episodes) {
      EXPECT_LE(e.reward, n) << id;
      EXPECT_GE(e.phases, 0);
      EXPECT_LE(e.phases, m.max_phase_count);
    }
  }
}

// --- evaluation -----------------------------------------------------------------

TEST(Evaluate, NullPolicyFailsWithNoMotion) {
  const auto m = evaluate_policy(config_for("one_leg"), null_policy_factory(), {0, 1, 2});
  EXPECT_EQ(m.success_rate, 0.0);
  EXPECT_EQ(m.max_phases, 0);
  for (const auto& e : m.episodes) EXPECT_EQ(e.cause, TerminationCause::NoMotion);
}

TEST(Evaluate, ThrowingPolicyIsPolicyError) {
  PolicyFactory bad = [](std::uint64_t) -> Policy {
    return [](const Observation&, const Env& env) -> Action {
      if (env.steps() == 3) throw std::runtime_error("boom");
      return Action::zero();
    };
  };
  const auto m = evaluate_policy(config_for("one_leg"), bad, {0});
  EXPECT_EQ(m.episodes[0].cause, TerminationCause::PolicyError);
  EXPECT_EQ(m.episodes[0].length, 3);
  EXPECT_EQ(m.episodes[0].error_note, "boom");
}

TEST(Evaluate, OutOfRangeActionIsPolicyError) {
  PolicyFactory bad = [](std::uint64_t) -> Policy {
    return [](const Observation&, const Env&) { return move(2.0, 0, 0); };
  };
  const auto m = evaluate_policy(config_for("one_leg"), bad, {0});
  EXPECT_EQ(m.episodes[0].cause, TerminationCause::PolicyError);
  EXPECT_NE(m.episodes[0].error_note->find("invalid action"), std::string::npos);
}

TEST(Evaluate, ParallelMatchesSerial) {
  const std::vector<std::uint64_t> seeds = {4, 9, 1, 7};
  const auto a = evaluate_policy(config_for("lamp"), scripted_policy_factory(), seeds, 1);
  const auto b = evaluate_policy(config_for("lamp"), scripted_policy_factory(), seeds, 3);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    EXPECT_EQ(a.episodes[i].seed, seeds[i]);
    EXPECT_EQ(a.episodes[i].seed, b.episodes[i].seed);
    EXPECT_EQ(a.episodes[i].length, b.episodes[i].length);
    EXPECT_EQ(a.episodes[i].phases, b.episodes[i].phases);
  }
  EXPECT_EQ(a.success_rate, 1.0);
  EXPECT_EQ(a.mean_phases, 7.0);
}

// --- run config -------------------------------------------------------------------

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c = config_for("drawer", Level::Medium);
  c.seeds = {3, 5, 8};
  c.noise.flip_probability = 0.05;
  c.termination.max_steps_total = 1234;
  c.controller.delta_position_clip = 0.07;
  c.observation_channels.image = true;
  const Json j = to_json(c);
  EXPECT_EQ(run_config_from_json(Json::parse(j.dump())), c);
}

TEST(RunConfig, MissingKeysKeepDefaultsUnknownKeysRejected) {
  const RunConfig c = run_config_from_json(Json{{"format_version", 1}, {"furniture", "lamp"}});
  EXPECT_EQ(c.furniture, "lamp");
  EXPECT_EQ(c.controller, ControllerConfig{});
  EXPECT_THROW(run_config_from_json(Json{{"format_version", 1}, {"furnitur", "lamp"}}), FormatError);
  EXPECT_THROW(run_config_from_json(Json{{"format_version", 1}, {"noise", {{"sigma", 1}}}}), FormatError);
  EXPECT_THROW(run_config_from_json(Json{{"format_version", 2}}), FormatError);
}

TEST(RunConfig, InvalidValuesRejected) {
  EXPECT_THROW(run_config_from_json(Json{{"format_version", 1}, {"level", "extreme"}}), FormatError);
  EXPECT_THROW(run_config_from_json(Json{{"format_version", 1}, {"noise", {{"dropout_probability", 1.5}}}}),
               FormatError);
}

TEST(RunConfig, FileParseErrorNamesLine) {
  const auto path = std::filesystem::temp_directory_path() / "fbench_bad_config.json";
  {
    std::ofstream out(path);
    out << "{\n  \"format_version\": 1,\n  \"furniture\": \"lamp\",,\n}\n";
  }
  try {
    load_run_config(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}
