#pragma once
// Episode files: one JSON header line, then one JSON line per env step.
// nlohmann::json prints doubles with the shortest round-trip decimal, and
// objects keep sorted keys, so write -> read -> write is byte-identical.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbench/config.hpp"
#include "fbench/env.hpp"
#include "fbench/json_util.hpp"

namespace fbench {

inline constexpr int kEpisodeFormatVersion = 1;

enum class Operator { Scripted, Teleop, Policy };

inline std::string to_string(Operator o) {
  switch (o) {
    case Operator::Scripted: return "scripted";
    case Operator::Teleop: return "teleop";
    case Operator::Policy: return "policy";
  }
  return "?";
}

inline Operator operator_from_string(const std::string& s) {
  if (s == "scripted") return Operator::Scripted;
  if (s == "teleop") return Operator::Teleop;
  if (s == "policy") return Operator::Policy;
  throw std::invalid_argument("unknown operator '" + s + "'");
}

struct EpisodeHeader {
  int format_version = kEpisodeFormatVersion;
  std::string furniture_id;
  Level randomness_level = Level::Low;
  std::uint64_t seed = 0;
  double control_frequency_hz = 10.0;
  bool success = false;
  std::optional<std::string> error_note;
  Operator op = Operator::Scripted;
  std::optional<TerminationCause> termination_cause;
  RunConfig config;                 // everything replay needs besides the actions
  Observation initial_observation;  // what reset returned

  bool operator==(const EpisodeHeader&) const = default;
};

struct StepRecord {
  Observation observation;  // after the action
  Action action;
  int reward = 0;
  int phase = 0;
  std::int64_t tick = 0;

  bool operator==(const StepRecord&) const = default;
};

struct Episode {
  EpisodeHeader header;
  std::vector<StepRecord> steps;

  bool operator==(const Episode&) const = default;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<TerminationCause> cause_from_string(const std::string& s) {
  for (auto c : {TerminationCause::Success, TerminationCause::NoMotion, TerminationCause::Unsafe,
                 TerminationCause::MaxSkill, TerminationCause::MaxTotal, TerminationCause::PolicyError})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline void validate_episode(const Episode& ep) {
  const EpisodeHeader& h = ep.header;
  if (h.format_version != kEpisodeFormatVersion)
    throw std::invalid_argument("unsupported episode format_version " + std::to_string(h.format_version));
  if (!(h.control_frequency_hz > 0)) throw std::invalid_argument("control_frequency_hz must be positive");
  if (ep.steps.empty()) throw std::invalid_argument("episode has no steps");
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const StepRecord& s = ep.steps[i];
    const std::string at = "step " + std::to_string(i + 1) + ": ";
    if (s.reward < 0) throw std::invalid_argument(at + "negative reward");
    for (double c : s.action.to_array())
      if (!std::isfinite(c)) throw std::invalid_argument(at + "non-finite action");
    if (i > 0 && s.tick <= ep.steps[i - 1].tick) throw std::invalid_argument(at + "tick not increasing");
    if (i > 0 && s.phase < ep.steps[i - 1].phase) throw std::invalid_argument(at + "phase decreased");
  }
}

inline Json header_to_json(const EpisodeHeader& h, std::size_t n_steps) {
  Json j{{"format_version", h.format_version},
         {"furniture_id", h.furniture_id},
         {"randomness_level", to_string(h.randomness_level)},
         {"seed", h.seed},
         {"control_frequency_hz", h.control_frequency_hz},
         {"success", h.success},
         {"operator", to_string(h.op)},
         {"steps", n_steps},
         {"config", to_json(h.config)},
         {"initial_observation", observation_to_json(h.initial_observation)}};
  if (h.error_note) j["error_note"] = *h.error_note;
  if (h.termination_cause) j["termination_cause"] = to_string(*h.termination_cause);
  return j;
}

inline Json step_to_json(const StepRecord& s) {
  const auto a = s.action.to_array();
  return {{"tick", s.tick},
          {"action", std::vector<double>(a.begin(), a.end())},
          {"reward", s.reward},
          {"phase", s.phase},
          {"observation", observation_to_json(s.observation)}};
}

inline EpisodeHeader header_from_json(const Json& j, const std::string& w, std::size_t& n_steps) {
  require_keys(j, {"format_version", "furniture_id", "randomness_level", "seed", "control_frequency_hz", "success",
                   "operator", "steps", "config", "initial_observation", "error_note", "termination_cause"},
               w);
  EpisodeHeader h;
  h.format_version = get_int(j, "format_version", w);
  if (h.format_version != kEpisodeFormatVersion)
    throw FormatError(w, "unsupported episode format_version " + std::to_string(h.format_version));
  h.furniture_id = get_string(j, "furniture_id", w);
  try {
    h.randomness_level = level_from_string(get_string(j, "randomness_level", w));
    h.op = operator_from_string(get_string(j, "operator", w));
  } catch (const std::invalid_argument& e) {
    throw FormatError(w, e.what());
  }
  const Json& seed = field(j, "seed", w);
  if (!seed.is_number_unsigned()) throw FormatError(w + "/seed", "expected a non-negative integer");
  h.seed = seed.get<std::uint64_t>();
  h.control_frequency_hz = get_number(j, "control_frequency_hz", w);
  if (!(h.control_frequency_hz > 0)) throw FormatError(w + "/control_frequency_hz", "must be positive");
  const Json& ok = field(j, "success", w);
  if (!ok.is_boolean()) throw FormatError(w + "/success", "expected a boolean");
  h.success = ok.get<bool>();
  const Json& n = field(j, "steps", w);
  if (!n.is_number_unsigned()) throw FormatError(w + "/steps", "expected a non-negative integer");
  n_steps = n.get<std::size_t>();
  if (j.contains("error_note")) h.error_note = get_string(j, "error_note", w);
  if (j.contains("termination_cause")) {
    h.termination_cause = cause_from_string(get_string(j, "termination_cause", w));
    if (!h.termination_cause) throw FormatError(w + "/termination_cause", "unknown cause");
  }
  try {
    h.config = run_config_from_json(field(j, "config", w));
  } catch (const FormatError& e) {
    throw FormatError(w + "/config", e.what());
  }
  h.initial_observation = observation_from_json(field(j, "initial_observation", w), w + "/initial_observation");
  return h;
}

inline StepRecord step_from_json(const Json& j, const std::string& w) {
  require_keys(j, {"tick", "action", "reward", "phase", "observation"}, w);
  StepRecord s;
  const Json& tick = field(j, "tick", w);
  if (!tick.is_number_integer()) throw FormatError(w + "/tick", "expected an integer");
  s.tick = tick.get<std::int64_t>();
  const Json& a = field(j, "action", w);
  if (!a.is_array() || a.size() != 8) throw FormatError(w + "/action", "expected an array of 8 numbers");
  std::array<double, 8> v{};
  for (int i = 0; i < 8; ++i) v[i] = number_at(a[i], w + "/action/" + std::to_string(i));
  s.action = Action::from_array(v);
  s.reward = get_int(j, "reward", w);
  s.phase = get_int(j, "phase", w);
  s.observation = observation_from_json(field(j, "observation", w), w + "/observation");
  return s;
}

}  // namespace detail

/// The exact bytes write_episode puts on disk.
inline std::string serialize_episode(const Episode& ep) {
  detail::validate_episode(ep);
  std::string out = detail::header_to_json(ep.header, ep.steps.size()).dump();
  out += '\n';
  for (const StepRecord& s : ep.steps) {
    out += detail::step_to_json(s).dump();
    out += '\n';
  }
  return out;
}

inline void write_episode(const Episode& ep, const std::filesystem::path& path) {
  const std::string bytes = serialize_episode(ep);  // validates before touching the file
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Parse episode text. `source` prefixes error locations ("file:line N").
inline Episode parse_episode(const std::string& text, const std::string& source) {
  Episode ep;
  std::size_t expected = 0;
  std::size_t line_no = 0, pos = 0;
  auto last_valid = [&]() {
    return ep.steps.empty() ? std::string("last valid record: header (line 1)")
                            : "last valid record: step " + std::to_string(ep.steps.size()) + " (line " +
                                  std::to_string(ep.steps.size() + 1) + ")";
  };
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = text.substr(pos, complete ? nl - pos : std::string::npos);
    pos = complete ? nl + 1 : text.size();
    ++line_no;
    const std::string where = source + ":line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      if (line_no == 1) throw FormatError(where, "malformed header");
      throw FormatError(where, std::string(complete ? "malformed record" : "truncated record") + "; " + last_valid());
    }
    if (line_no == 1) {
      ep.header = detail::header_from_json(j, where, expected);
      continue;
    }
    StepRecord s = detail::step_from_json(j, where);
    if (!ep.steps.empty()) {
      if (s.tick <= ep.steps.back().tick) throw FormatError(where, "tick not increasing");
      if (s.phase < ep.steps.back().phase) throw FormatError(where, "phase decreased");
    }
    if (s.reward < 0) throw FormatError(where, "negative reward");
    ep.steps.push_back(std::move(s));
  }
  if (line_no == 0) throw FormatError(source, "empty file");
  if (ep.steps.size() != expected)
    throw FormatError(source, "truncated: header announces " + std::to_string(expected) + " steps, found " +
                                  std::to_string(ep.steps.size()) + "; " + last_valid());
  if (ep.steps.empty()) throw FormatError(source, "episode has no steps");
  return ep;
}

inline Episode read_episode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_episode(buf.str(), path.string());
}

/// All *.jsonl files under `dir` (non-recursive), sorted by name.
inline std::vector<std::filesystem::path> list_episode_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------
// Recording.

class EpisodeRecorder {
 public:
  EpisodeRecorder(const Env& env, const Observation& initial, Operator op) {
    ep_.header.furniture_id = env.config().furniture;
    ep_.header.randomness_level = env.config().level;
    ep_.header.seed = env.seed();
    ep_.header.control_frequency_hz = env.config().controller.action_frequency;
    ep_.header.op = op;
    ep_.header.config = env.config();
    ep_.header.initial_observation = initial;
  }

  void add(const Action& a, const StepResult& r, const Env& env) {
    ep_.steps.push_back({r.observation, a, r.reward, r.info.phase_completed, env.world().tick});
  }

  Episode finish(const Env& env, std::optional<std::string> error_note = {}) {
    ep_.header.termination_cause = env.cause();
    ep_.header.success = env.cause() == TerminationCause::Success;
    ep_.header.error_note = std::move(error_note);
    return ep_;
  }

  std::size_t size() const { return ep_.steps.size(); }

 private:
  Episode ep_;
};

// ---------------------------------------------------------------------------
// Replay.

class ConfigMismatch : public std::invalid_argument {
 public:
  explicit ConfigMismatch(const std::string& why) : std::invalid_argument("config mismatch: " + why) {}
};

struct ReplayReport {
  std::size_t steps_replayed = 0;
  double max_deviation = 0.0;                     // over observations, rewards and phases
  std::optional<std::size_t> first_divergent_step;  // 1-based step index; 0 = reset observation
  std::optional<std::int64_t> first_divergent_tick;
  int recorded_reward_total = 0, replayed_reward_total = 0;
  int recorded_phase = 0, replayed_phase = 0;
};

/// Re-run the recorded actions in `env` (which must carry the episode's config).
inline ReplayReport replay_episode(Env& env, const Episode& ep, std::optional<std::uint64_t> seed = {}) {
  const EpisodeHeader& h = ep.header;
  if (!(env.config() == h.config)) throw ConfigMismatch("env config differs from the recorded config");
  if (h.furniture_id != h.config.furniture) throw ConfigMismatch("header furniture differs from its config");
  if (h.randomness_level != h.config.level) throw ConfigMismatch("header level differs from its config");
  if (h.control_frequency_hz != h.config.controller.action_frequency)
    throw ConfigMismatch("header control frequency differs from its config");

  ReplayReport rep;
  auto note = [&](double dev, std::size_t step, std::int64_t tick) {
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > 0 && !rep.first_divergent_step) {
      rep.first_divergent_step = step;
      rep.first_divergent_tick = tick;
    }
  };
  const Observation first = env.reset(seed.value_or(h.seed));
  note(observation_deviation(first, h.initial_observation), 0, 0);
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const StepRecord& rec = ep.steps[i];
    rep.recorded_reward_total += rec.reward;
    rep.recorded_phase = rec.phase;
    if (env.done()) {
      note(INFINITY, i + 1, rec.tick);
      continue;
    }
    const StepResult r = env.step(rec.action);
    ++rep.steps_replayed;
    rep.replayed_reward_total += r.reward;
    rep.replayed_phase = r.info.phase_completed;
    double dev = observation_deviation(r.observation, rec.observation);
    dev = std::max(dev, std::abs(double(r.reward - rec.reward)));
    dev = std::max(dev, std::abs(double(r.info.phase_completed - rec.phase)));
    dev = std::max(dev, std::abs(double(env.world().tick - rec.tick)));
    note(dev, i + 1, rec.tick);
  }
  return rep;
}

inline ReplayReport replay_episode(const Episode& ep, std::optional<std::uint64_t> seed = {}) {
  Env env(ep.header.config);
  return replay_episode(env, ep, seed);
}

// ---------------------------------------------------------------------------
// Dataset statistics.

struct StatsRow {
  std::string furniture_id;
  Level level = Level::Low;
  std::size_t count = 0;
  double avg_length = 0.0;   // steps
  double total_hours = 0.0;  // steps / frequency / 3600

  bool operator==(const StatsRow&) const = default;
};

/// One row per (furniture, level), sorted. Step counts are summed as
/// integers first so the result does not depend on episode order.
inline std::vector<StatsRow> compute_stats(const std::vector<Episode>& episodes, double control_frequency_hz) {
  if (!(control_frequency_hz > 0)) throw std::invalid_argument("control frequency must be positive");
  std::map<std::pair<std::string, Level>, std::pair<std::size_t, std::size_t>> acc;  // count, steps
  for (const Episode& ep : episodes) {
    auto& [count, steps] = acc[{ep.header.furniture_id, ep.header.randomness_level}];
    ++count;
    steps += ep.steps.size();
  }
  std::vector<StatsRow> rows;
  for (const auto& [key, v] : acc) {
    StatsRow r;
    r.furniture_id = key.first;
    r.level = key.second;
    r.count = v.first;
    r.avg_length = static_cast<double>(v.second) / static_cast<double>(v.first);
    r.total_hours = static_cast<double>(v.second) / control_frequency_hz / 3600.0;
    rows.push_back(r);
  }
  return rows;
}

inline Json stats_to_json(const std::vector<StatsRow>& rows) {
  Json out = Json::array();
  for (const StatsRow& r : rows)
    out.push_back({{"furniture_id", r.furniture_id},
                   {"level", to_string(r.level)},
                   {"count", r.count},
                   {"avg_length", r.avg_length},
                   {"total_hours", r.total_hours}});
  return out;
}

}  // namespace fbench
