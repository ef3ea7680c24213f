// fbench: operator entry points (eval, collect, replay, stats, init-sample,
// catalog, serve-teleop). Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fbench/config.hpp"
#include "fbench/dataset.hpp"
#include "fbench/evaluate.hpp"
#include "fbench/init_sampler.hpp"
#include "fbench/teleop_server.hpp"

namespace fs = std::filesystem;
using namespace fbench;

namespace {

/// Bad user input that should exit 2 rather than 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::optional<std::string> furniture;
  std::optional<std::string> level;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;  // --episodes or --count
  int default_count = 1;
  bool eval_mode = false;
  bool dump_config = false;
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--furniture", o.furniture, "Furniture id or catalog JSON path (default one_leg)");
  app->add_option("--level", o.level, "Randomness level: low, med, high (default low)");
  app->add_option("--config", o.config, "Run-config JSON; flags given here override it");
  app->add_option("--seed", o.seed, "First seed (default 0, or the config's seeds)");
  app->add_flag("--eval-mode", o.eval_mode, "High level cycles the three fixed evaluation layouts");
  app->add_flag("--dump-config", o.dump_config, "Print the effective run config as JSON and exit");
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int n) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < n; ++i) s.push_back(first + static_cast<std::uint64_t>(i));
  return s;
}

RunConfig resolve_config(const CommonOpts& o) {
  RunConfig cfg;
  if (o.config) {
    try {
      cfg = load_run_config(*o.config);
    } catch (const FormatError& e) {
      throw UsageError(e.what());
    }
  }
  if (o.furniture) cfg.furniture = *o.furniture;
  if (o.level) {
    try {
      cfg.level = level_from_string(*o.level);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (o.eval_mode) cfg.eval_mode = true;
  // Seed flags replace the config's list; with neither, consecutive seeds from 0.
  if (o.seed || o.count || !o.config) cfg.seeds = seed_range(o.seed.value_or(0), o.count.value_or(o.default_count));
  if (cfg.seeds.empty()) throw UsageError("no seeds to run");
  try {
    load_furniture(cfg.furniture);
  } catch (const FurnitureNotFound& e) {
    throw UsageError(e.what());
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

PolicyFactory policy_by_name(const std::string& name) {
  if (name == "scripted") return scripted_policy_factory();
  if (name == "null") return null_policy_factory();
  if (name == "random") return random_policy_factory();
  throw UsageError("unknown policy '" + name + "' (expected scripted, null, random)");
}

std::string episode_file_name(const Episode& ep, std::size_t index) {
  return ep.header.furniture_id + "_" + to_string(ep.header.randomness_level) + "_seed" +
         std::to_string(ep.header.seed) + "_" + std::to_string(index) + ".jsonl";
}

void write_records(const std::vector<std::optional<Episode>>& records, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i]) write_episode(*records[i], dir / episode_file_name(*records[i], i));
}

void print_metrics(const EvalMetrics& m, const RunConfig& cfg, bool json) {
  if (json) {
    Json j = metrics_to_json(m);
    j["furniture"] = cfg.furniture;
    j["level"] = to_string(cfg.level);
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::printf("furniture %s  level %s  episodes %zu\n", cfg.furniture.c_str(), to_string(cfg.level).c_str(),
              m.episodes.size());
  for (const EpisodeResult& r : m.episodes)
    std::printf("  seed %-6llu %-12s phases %2d/%d  reward %d  length %d%s%s\n",
                static_cast<unsigned long long>(r.seed), to_string(r.cause).c_str(), r.phases, m.max_phase_count,
                r.reward, r.length, r.error_note ? "  error: " : "", r.error_note ? r.error_note->c_str() : "");
  std::printf("success_rate %.3f\nphases mean %.2f min %d max %d (of %d)\nmean_length %.1f\n", m.success_rate,
              m.mean_phases, m.min_phases, m.max_phases, m.max_phase_count, m.mean_length);
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbench: desk-scale furniture assembly benchmark"};
  app.require_subcommand(1);

  // eval
  CommonOpts eval_o;
  eval_o.default_count = 10;
  int eval_jobs = 1;
  std::string eval_policy = "scripted", eval_format = "text";
  std::optional<std::string> eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a policy over a list of seeds");
  add_common(eval, eval_o);
  eval->add_option("--episodes", eval_o.count, "Number of episodes (default 10)")->check(CLI::PositiveNumber);
  eval->add_option("--policy", eval_policy, "scripted, null or random (default scripted)");
  eval->add_option("--jobs", eval_jobs, "Episodes run in parallel (default 1)")->check(CLI::PositiveNumber);
  eval->add_option("--format", eval_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  eval->add_option("--out", eval_out, "Directory for per-episode records");

  // collect
  CommonOpts col_o;
  col_o.default_count = 10;
  int col_jobs = 1, col_port = 8765;
  bool col_scripted = false, col_teleop = false;
  std::string col_out = "data";
  std::optional<std::string> col_ui;
  auto* collect = app.add_subcommand("collect", "Record demonstrations (scripted expert or teleop)");
  add_common(collect, col_o);
  collect->add_flag("--scripted", col_scripted, "Use the scripted expert (default)");
  collect->add_flag("--teleop", col_teleop, "Serve the teleop bridge and record what the operator does");
  collect->add_option("--episodes", col_o.count, "Scripted episodes (default 10)")->check(CLI::PositiveNumber);
  collect->add_option("--jobs", col_jobs, "Scripted episodes run in parallel")->check(CLI::PositiveNumber);
  collect->add_option("--out", col_out, "Output directory (default data)");
  collect->add_option("--port", col_port, "Teleop port (default 8765)")->check(CLI::Range(0, 65535));
  collect->add_option("--ui-dir", col_ui, "Static UI directory for teleop")->check(CLI::ExistingDirectory);

  // replay
  std::string rep_path, rep_format = "text";
  std::optional<std::uint64_t> rep_seed;
  bool rep_strict = false;
  auto* replay = app.add_subcommand("replay", "Re-run an episode's actions and report divergence");
  replay->add_option("episode", rep_path, "Episode file")->required()->check(CLI::ExistingFile);
  replay->add_option("--seed", rep_seed, "Replay with this seed instead of the recorded one");
  replay->add_option("--format", rep_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  replay->add_flag("--strict", rep_strict, "Exit 1 on any divergence");

  // stats
  std::string stats_dir, stats_format = "text";
  double stats_hz = 10.0;
  auto* stats = app.add_subcommand("stats", "Per-(furniture, level) dataset statistics");
  stats->add_option("dir", stats_dir, "Directory of episode files")->required()->check(CLI::ExistingDirectory);
  stats->add_option("--frequency", stats_hz, "Control frequency in Hz for total hours (default 10)")
      ->check(CLI::PositiveNumber);
  stats->add_option("--format", stats_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  // init-sample
  CommonOpts init_o;
  auto* init = app.add_subcommand("init-sample", "Print sampled initial part poses as JSON");
  add_common(init, init_o);
  init->add_option("--count", init_o.count, "Number of seeds (default 1)")->check(CLI::PositiveNumber);

  // catalog
  std::string cat_id;
  auto* catalog = app.add_subcommand("catalog", "Print a built-in furniture as catalog JSON (a template for new ones)");
  catalog->add_option("furniture", cat_id, "Built-in furniture id")->required();

  // serve-teleop
  CommonOpts srv_o;
  int srv_port = 8765;
  std::string srv_out = "data";
  std::optional<std::string> srv_ui;
  std::string srv_address = "127.0.0.1";
  auto* serve = app.add_subcommand("serve-teleop", "Run the teleop websocket bridge on /teleop");
  add_common(serve, srv_o);
  serve->add_option("--port", srv_port, "Port (default 8765)")->check(CLI::Range(0, 65535));
  serve->add_option("--address", srv_address, "Bind address (default 127.0.0.1)");
  serve->add_option("--ui-dir", srv_ui, "Serve static UI files from here")->check(CLI::ExistingDirectory);
  serve->add_option("--out", srv_out, "Where recorded episodes go (default data)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto run_teleop = [&](const CommonOpts& o, int port, const std::string& address, const std::string& out,
                        const std::optional<std::string>& ui) {
    const RunConfig cfg = resolve_config(o);
    TeleopSession session(cfg, cfg.seeds.front(), out);
    TeleopServerConfig sc;
    sc.address = address;
    sc.port = static_cast<unsigned short>(port);
    if (ui) sc.ui_dir = fs::path(*ui);
    TeleopServer server(session, sc);
    const auto period = std::chrono::nanoseconds(static_cast<long long>(1e9 / cfg.controller.action_frequency));
    server.start(period);
    std::signal(SIGINT, [](int) { g_stop = 1; });
    std::signal(SIGTERM, [](int) { g_stop = 1; });
    std::printf("teleop: ws://%s:%u/teleop%s\n", address.c_str(), server.port(),
                ui ? "  (UI served at /)" : "");
    std::fflush(stdout);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    for (const auto& p : session.written()) std::printf("wrote %s\n", p.string().c_str());
    return 0;
  };

  try {
    if (*eval) {
      const RunConfig cfg = resolve_config(eval_o);
      if (eval_o.dump_config) {
        std::cout << to_json(cfg).dump(2) << "\n";
        return 0;
      }
      const PolicyFactory factory = policy_by_name(eval_policy);
      std::vector<std::optional<Episode>> records;
      const EvalMetrics m = evaluate_policy(cfg, factory, cfg.seeds, eval_jobs,
                                            eval_out ? &records : nullptr,
                                            eval_policy == "scripted" ? Operator::Scripted : Operator::Policy);
      if (eval_out) write_records(records, *eval_out);
      print_metrics(m, cfg, eval_format == "json");
      return 0;
    }
    if (*collect) {
      if (col_teleop) return run_teleop(col_o, col_port, "127.0.0.1", col_out, col_ui);
      const RunConfig cfg = resolve_config(col_o);
      if (col_o.dump_config) {
        std::cout << to_json(cfg).dump(2) << "\n";
        return 0;
      }
      std::vector<std::optional<Episode>> records;
      const EvalMetrics m = evaluate_policy(cfg, scripted_policy_factory(), cfg.seeds,
                                            col_jobs, &records, Operator::Scripted);
      write_records(records, col_out);
      std::printf("wrote %zu episodes to %s (success_rate %.3f)\n", records.size(), col_out.c_str(), m.success_rate);
      return 0;
    }
    if (*replay) {
      Episode ep;
      try {
        ep = read_episode(rep_path);
      } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
      }
      const ReplayReport r = replay_episode(ep, rep_seed);
      if (rep_format == "json") {
        Json j{{"steps_replayed", r.steps_replayed},
               {"max_deviation", std::isfinite(r.max_deviation) ? Json(r.max_deviation) : Json("inf")},
               {"recorded_reward_total", r.recorded_reward_total},
               {"replayed_reward_total", r.replayed_reward_total},
               {"recorded_phase", r.recorded_phase},
               {"replayed_phase", r.replayed_phase}};
        j["first_divergent_step"] = r.first_divergent_step ? Json(*r.first_divergent_step) : Json(nullptr);
        j["first_divergent_tick"] = r.first_divergent_tick ? Json(*r.first_divergent_tick) : Json(nullptr);
        std::cout << j.dump(2) << "\n";
      } else {
        std::printf("steps %zu  max_deviation %g  first_divergent_step %s  reward %d/%d  phase %d/%d\n",
                    r.steps_replayed, r.max_deviation,
                    r.first_divergent_step ? std::to_string(*r.first_divergent_step).c_str() : "none",
                    r.replayed_reward_total, r.recorded_reward_total, r.replayed_phase, r.recorded_phase);
      }
      return rep_strict && r.max_deviation > 0 ? 1 : 0;
    }
    if (*stats) {
      std::vector<Episode> eps;
      for (const auto& f : list_episode_files(stats_dir)) eps.push_back(read_episode(f));
      const auto rows = compute_stats(eps, stats_hz);
      if (stats_format == "json") {
        std::cout << stats_to_json(rows).dump(2) << "\n";
      } else {
        std::printf("%-14s %-7s %6s %10s %10s\n", "furniture", "level", "demos", "avg_len", "total_hrs");
        for (const StatsRow& r : rows)
          std::printf("%-14s %-7s %6zu %10.1f %10.4f\n", r.furniture_id.c_str(), to_string(r.level).c_str(), r.count,
                      r.avg_length, r.total_hours);
      }
      return 0;
    }
    if (*init) {
      const RunConfig cfg = resolve_config(init_o);
      if (init_o.dump_config) {
        std::cout << to_json(cfg).dump(2) << "\n";
        return 0;
      }
      const AssemblyGraph g = load_furniture(cfg.furniture);
      Json out = Json::array();
      for (std::uint64_t s : cfg.seeds) {
        const auto poses = sample_initial_poses(g, cfg.level, cfg.init, s, cfg.eval_mode, cfg.plant.workspace);
        Json parts = Json::object();
        for (int k = 0; k < g.n_parts(); ++k) parts[g.parts[k].id] = pose_to_json(poses[k]);
        out.push_back({{"seed", s}, {"parts", parts}});
      }
      std::cout << Json{{"furniture", cfg.furniture}, {"level", to_string(cfg.level)}, {"samples", out}}.dump(2)
                << "\n";
      return 0;
    }
    if (*catalog) {
      try {
        std::cout << catalog_to_json(load_furniture(cat_id)).dump(2) << "\n";
      } catch (const FurnitureNotFound& e) {
        throw UsageError(e.what());
      }
      return 0;
    }
    if (*serve) {
      if (srv_o.dump_config) {
        std::cout << to_json(resolve_config(srv_o)).dump(2) << "\n";
        return 0;
      }
      return run_teleop(srv_o, srv_port, srv_address, srv_out, srv_ui);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n%s", e.what(), app.help().c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
