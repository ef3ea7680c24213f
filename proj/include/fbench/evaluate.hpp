#pragma once
// Policy evaluation over a seed list. Each episode gets its own Env and its
// own policy instance, so running them on several threads gives the same
// per-seed results in the same order.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fbench/dataset.hpp"
#include "fbench/env.hpp"
#include "fbench/expert.hpp"
#include "fbench/rng.hpp"

namespace fbench {

/// A policy sees the observation; the Env reference is there for privileged
/// scripted experts and must not be mutated.
using Policy = std::function<Action(const Observation&, const Env&)>;
using PolicyFactory = std::function<Policy(std::uint64_t seed)>;

struct EpisodeResult {
  std::uint64_t seed = 0;
  bool success = false;
  int phases = 0;
  int reward = 0;
  int length = 0;
  TerminationCause cause = TerminationCause::MaxTotal;
  std::optional<std::string> error_note;
};

struct EvalMetrics {
  double success_rate = 0.0;
  double mean_phases = 0.0;
  int min_phases = 0;
  int max_phases = 0;
  double mean_length = 0.0;
  int max_phase_count = 0;  // the furniture's phase list length
  std::vector<EpisodeResult> episodes;
};

inline PolicyFactory scripted_policy_factory(ExpertConfig cfg = {}) {
  return [cfg](std::uint64_t) -> Policy {
    auto expert = std::make_shared<ScriptedExpert>(cfg);
    return [expert](const Observation&, const Env& env) { return expert->act(env); };
  };
}

inline PolicyFactory null_policy_factory() {
  return [](std::uint64_t) -> Policy { return [](const Observation&, const Env&) { return Action::zero(); }; };
}

/// Uniform random actions: position and gripper in [-1, 1] scaled by `scale`,
/// orientation a random rotation of up to 30 deg.
inline PolicyFactory random_policy_factory(double scale = 0.05) {
  return [scale](std::uint64_t seed) -> Policy {
    auto rng = std::make_shared<Rng>(Rng::stream(seed, 99));
    return [rng, scale](const Observation&, const Env&) {
      Action a;
      a.delta_position = scale * Vec3(rng->uniform(-1, 1), rng->uniform(-1, 1), rng->uniform(-1, 1));
      const Vec3 axis = Vec3(rng->normal(), rng->normal(), rng->normal()).normalized();
      a.delta_orientation = axis_angle(axis, rng->uniform(0, deg2rad(30.0)));
      a.gripper = rng->uniform(-1, 1);
      return a;
    };
  };
}

/// Run one episode. Exceptions from the policy, or an action the env
/// rejects, end the episode with cause policy_error.
inline EpisodeResult run_episode(const RunConfig& cfg, const AssemblyGraph& graph, std::uint64_t seed,
                                 const PolicyFactory& factory, Operator op = Operator::Policy,
                                 std::optional<Episode>* record = nullptr) {
  Env env(cfg, graph);
  const Observation first = env.reset(seed);
  EpisodeRecorder rec(env, first, op);
  Policy policy = factory(seed);
  EpisodeResult res;
  res.seed = seed;
  Observation obs = first;
  while (!env.done()) {
    Action a;
    try {
      a = policy(obs, env);
      StepResult r = env.step(a);
      rec.add(a, r, env);
      res.reward += r.reward;
      obs = std::move(r.observation);
    } catch (const std::exception& e) {
      res.error_note = e.what();
      break;
    }
  }
  res.phases = env.phase().completed;
  res.length = env.steps();
  res.cause = res.error_note ? TerminationCause::PolicyError : *env.cause();
  res.success = res.cause == TerminationCause::Success;
  if (record && rec.size() > 0) {
    Episode ep = rec.finish(env, res.error_note);
    if (res.error_note) ep.header.termination_cause = TerminationCause::PolicyError;
    *record = std::move(ep);
  }
  return res;
}

inline EvalMetrics evaluate_policy(const RunConfig& cfg, const PolicyFactory& factory,
                                   const std::vector<std::uint64_t>& seeds, int jobs = 1,
                                   std::vector<std::optional<Episode>>* records = nullptr,
                                   Operator op = Operator::Policy) {
  const AssemblyGraph graph = load_furniture(cfg.furniture);
  EvalMetrics m;
  m.max_phase_count = static_cast<int>(graph.phases.size());
  m.episodes.resize(seeds.size());
  if (records) records->assign(seeds.size(), std::nullopt);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < seeds.size(); i = next++)
      m.episodes[i] = run_episode(cfg, graph, seeds[i], factory, op, records ? &(*records)[i] : nullptr);
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (seeds.empty()) return m;
  m.min_phases = std::numeric_limits<int>::max();
  double phases = 0, length = 0, wins = 0;
  for (const EpisodeResult& r : m.episodes) {
    wins += r.success;
    phases += r.phases;
    length += r.length;
    m.min_phases = std::min(m.min_phases, r.phases);
    m.max_phases = std::max(m.max_phases, r.phases);
  }
  const double n = static_cast<double>(seeds.size());
  m.success_rate = wins / n;
  m.mean_phases = phases / n;
  m.mean_length = length / n;
  return m;
}

inline Json metrics_to_json(const EvalMetrics& m) {
  Json eps = Json::array();
  for (const EpisodeResult& r : m.episodes) {
    Json e{{"seed", r.seed},     {"success", r.success}, {"phases", r.phases},
           {"reward", r.reward}, {"length", r.length},   {"cause", to_string(r.cause)}};
    if (r.error_note) e["error_note"] = *r.error_note;
    eps.push_back(e);
  }
  return {{"success_rate", m.success_rate}, {"mean_phases", m.mean_phases}, {"min_phases", m.min_phases},
          {"max_phases", m.max_phases},     {"mean_length", m.mean_length}, {"phase_count", m.max_phase_count},
          {"episodes", eps}};
}

}  // namespace fbench
