#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fbench/dataset.hpp"
#include "fbench/evaluate.hpp"

using namespace fbench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fbench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

Episode scripted_episode(const std::string& furniture, std::uint64_t seed, bool fused = false) {
  RunConfig cfg;
  cfg.furniture = furniture;
  cfg.observation_channels.fused_part_poses = fused;
  std::optional<Episode> rec;
  run_episode(cfg, load_furniture(furniture), seed, scripted_policy_factory(), Operator::Scripted, &rec);
  return *rec;
}

Episode synthetic(const std::string& furniture, Level level, int steps) {
  Episode ep;
  ep.header.furniture_id = furniture;
  ep.header.randomness_level = level;
  ep.header.config.furniture = furniture;
  ep.header.config.level = level;
  for (int i = 1; i <= steps; ++i) {
    StepRecord s;
    s.tick = 99 * i;
    ep.steps.push_back(s);
  }
  return ep;
}

}  // namespace

TEST(Dataset, SameInputsGiveByteIdenticalFiles) {
  const fs::path dir = temp_dir("det");
  write_episode(scripted_episode("one_leg", 11, true), dir / "a.jsonl");
  write_episode(scripted_episode("one_leg", 11, true), dir / "b.jsonl");
  const std::string a = slurp(dir / "a.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b.jsonl"));
}

TEST(Dataset, WriteReadReserializeIsByteIdentical) {
  const fs::path dir = temp_dir("rt");
  const Episode ep = scripted_episode("lamp", 2, true);
  write_episode(ep, dir / "ep.jsonl");
  const Episode back = read_episode(dir / "ep.jsonl");
  EXPECT_EQ(back, ep);
  EXPECT_EQ(serialize_episode(back), slurp(dir / "ep.jsonl"));
  EXPECT_TRUE(back.header.success);
  EXPECT_EQ(back.header.op, Operator::Scripted);
  EXPECT_EQ(back.header.termination_cause, TerminationCause::Success);
}

TEST(Dataset, RealsSurviveBitExact) {
  Episode ep = synthetic("one_leg", Level::Low, 1);
  const double awkward[] = {0.1, 1.0 / 3.0, -0.0, 5e-324, 1.7976931348623157e308, 0.30000000000000004};
  ep.steps[0].observation.ee_position = Vec3(awkward[0], awkward[1], awkward[2]);
  ep.steps[0].observation.gripper_width = awkward[3];
  ep.steps[0].observation.ee_linear_velocity = Vec3(awkward[4], awkward[5], 0);
  const Episode back = parse_episode(serialize_episode(ep), "mem");
  const auto& o = back.steps[0].observation;
  EXPECT_EQ(o.ee_position.y(), awkward[1]);
  EXPECT_TRUE(std::signbit(o.ee_position.z()));
  EXPECT_EQ(o.gripper_width, awkward[3]);
  EXPECT_EQ(o.ee_linear_velocity.x(), awkward[4]);
  EXPECT_EQ(o.ee_linear_velocity.y(), awkward[5]);
}

TEST(Dataset, ReplayOfFreshRecordingHasZeroDivergence) {
  const Episode ep = scripted_episode("one_leg", 4, true);
  const ReplayReport r = replay_episode(ep);
  EXPECT_EQ(r.max_deviation, 0.0);
  EXPECT_FALSE(r.first_divergent_step.has_value());
  EXPECT_EQ(r.steps_replayed, ep.steps.size());
  EXPECT_EQ(r.replayed_reward_total, 1);
  EXPECT_EQ(r.replayed_phase, 5);
}

TEST(Dataset, ReplayWithOtherSeedDiverges) {
  const Episode ep = scripted_episode("one_leg", 4);
  const ReplayReport r = replay_episode(ep, 5);
  EXPECT_GT(r.max_deviation, 0.0);
  ASSERT_TRUE(r.first_divergent_step.has_value());
}

TEST(Dataset, PerturbedFirstActionDivergesAtStepOne) {
  Episode ep = scripted_episode("one_leg", 4);
  auto a = ep.steps[0].action.to_array();
  a[0] = std::nextafter(a[0], 1.0);
  ep.steps[0].action = Action::from_array(a);
  const ReplayReport r = replay_episode(ep);
  ASSERT_TRUE(r.first_divergent_step.has_value());
  EXPECT_EQ(*r.first_divergent_step, 1u);
  EXPECT_EQ(*r.first_divergent_tick, 99);
}

TEST(Dataset, ReplayRejectsMismatchedEnv) {
  const Episode ep = scripted_episode("one_leg", 4);
  RunConfig other = ep.header.config;
  other.noise.translation_sigma = 0.001;
  Env env(other);
  EXPECT_THROW(replay_episode(env, ep), ConfigMismatch);
}

TEST(Dataset, EmptyEpisodeRefused) {
  const fs::path dir = temp_dir("empty");
  Episode ep = synthetic("one_leg", Level::Low, 0);
  EXPECT_THROW(write_episode(ep, dir / "x.jsonl"), std::invalid_argument);
  EXPECT_FALSE(fs::exists(dir / "x.jsonl"));
}

TEST(Dataset, InvariantViolationsRefusedOnWrite) {
  Episode ep = synthetic("one_leg", Level::Low, 3);
  ep.steps[1].phase = 2;
  ep.steps[2].phase = 1;
  EXPECT_THROW(serialize_episode(ep), std::invalid_argument);
  ep = synthetic("one_leg", Level::Low, 3);
  ep.steps[2].tick = ep.steps[1].tick;
  EXPECT_THROW(serialize_episode(ep), std::invalid_argument);
  ep = synthetic("one_leg", Level::Low, 3);
  ep.header.control_frequency_hz = 0;
  EXPECT_THROW(serialize_episode(ep), std::invalid_argument);
}

TEST(Dataset, UnknownVersionRejectedOnRead) {
  std::string text = serialize_episode(synthetic("one_leg", Level::Low, 2));
  const std::string key = "\"format_version\":1,\"furniture_id\"";
  ASSERT_NE(text.find(key), std::string::npos);
  text.replace(text.find(key), key.size(), "\"format_version\":9,\"furniture_id\"");
  EXPECT_THROW(parse_episode(text, "v9"), FormatError);
}

TEST(Dataset, MalformedLineNamesItsNumber) {
  std::string text = serialize_episode(synthetic("one_leg", Level::Low, 4));
  // Break line 3 (step 2).
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos + 1, "#");
  try {
    parse_episode(text, "bad.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.jsonl:line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("last valid record: step 1"), std::string::npos) << msg;
  }
}

TEST(Dataset, TruncatedFileNamesLastValidRecord) {
  const std::string text = serialize_episode(synthetic("one_leg", Level::Low, 5));
  // Cut in the middle of the fourth step.
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
  try {
    parse_episode(text.substr(0, pos + 10), "cut.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("last valid record: step 3 (line 4)"), std::string::npos) << e.what();
  }
  // Cut exactly at a line boundary: the header's step count catches it.
  try {
    parse_episode(text.substr(0, pos), "cut.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("last valid record: step 3"), std::string::npos) << e.what();
  }
}

TEST(Dataset, NonMonotonePhaseRejectedOnRead) {
  Episode ep = synthetic("one_leg", Level::Low, 3);
  ep.steps[1].phase = 1;
  ep.steps[2].phase = 1;
  std::string text = serialize_episode(ep);
  const std::size_t last = text.rfind("\"phase\":1");
  text.replace(last, 9, "\"phase\":0");
  EXPECT_THROW(parse_episode(text, "p"), FormatError);
}

TEST(Dataset, HandBuiltMinimalFileParses) {
  const std::string obs =
      R"({"ee_position":[0,0,0.2],"ee_orientation":[0,1,0,0],"ee_linear_velocity":[0,0,0],)"
      R"("ee_angular_velocity":[0,0,0],"gripper_width":0.08})";
  const std::string text =
      R"({"format_version":1,"furniture_id":"one_leg","randomness_level":"low","seed":0,)"
      R"("control_frequency_hz":10,"success":false,"operator":"teleop","steps":1,)"
      R"("config":{"format_version":1},"initial_observation":)" + obs + "}\n" +
      R"({"tick":99,"action":[0,0,0,1,0,0,0,0],"reward":0,"phase":0,"observation":)" + obs + "}\n";
  const Episode ep = parse_episode(text, "mini");
  EXPECT_EQ(ep.steps.size(), 1u);
  EXPECT_EQ(ep.header.op, Operator::Teleop);
  EXPECT_EQ(ep.steps[0].tick, 99);
  EXPECT_EQ(ep.header.config, RunConfig{});
}

TEST(Stats, TenSyntheticEpisodes) {
  std::vector<Episode> eps;
  for (int i = 0; i < 10; ++i) eps.push_back(synthetic("one_leg", Level::Low, 100));
  const auto rows = compute_stats(eps, 10.0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].count, 10u);
  EXPECT_DOUBLE_EQ(rows[0].avg_length, 100.0);
  EXPECT_DOUBLE_EQ(rows[0].total_hours, 10.0 * 100.0 / 10.0 / 3600.0);
}

TEST(Stats, SingleEpisodeAndGrouping) {
  EXPECT_DOUBLE_EQ(compute_stats({synthetic("lamp", Level::Low, 37)}, 10.0)[0].avg_length, 37.0);
  std::vector<Episode> eps = {synthetic("lamp", Level::Low, 10), synthetic("one_leg", Level::Medium, 30),
                              synthetic("lamp", Level::Low, 20), synthetic("one_leg", Level::Low, 5)};
  const auto rows = compute_stats(eps, 5.0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].furniture_id, "lamp");
  EXPECT_EQ(rows[0].count, 2u);
  EXPECT_DOUBLE_EQ(rows[0].avg_length, 15.0);
  EXPECT_DOUBLE_EQ(rows[0].total_hours, 30.0 / 5.0 / 3600.0);
  EXPECT_EQ(rows[1].level, Level::Low);
  EXPECT_EQ(rows[2].level, Level::Medium);
  std::reverse(eps.begin(), eps.end());
  EXPECT_EQ(compute_stats(eps, 5.0), rows);
  EXPECT_TRUE(compute_stats({}, 10.0).empty());
}

TEST(Stats, DirectoryListingReadsOnlyEpisodes) {
  const fs::path dir = temp_dir("stats");
  write_episode(synthetic("lamp", Level::Low, 3), dir / "b.jsonl");
  write_episode(synthetic("lamp", Level::Low, 5), dir / "a.jsonl");
  spit(dir / "notes.txt", "ignore me");
  const auto files = list_episode_files(dir);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].filename(), "a.jsonl");
}
