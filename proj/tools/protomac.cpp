// Command-line front end: train | evaluate | sweep | tune-pt.
//
// Exit codes: 0 success, 2 bad configuration or usage, 3 I/O failure,
// 4 incompatible or corrupt checkpoint.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "protomac/protomac.hpp"

namespace fs = std::filesystem;
using namespace protomac;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitCheckpoint = 4;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON in " + path);
  return j;
}

ExperimentPlan plan_from_file(const std::optional<std::string>& path) {
  if (!path) return ExperimentPlan{};
  return plan_from_json(load_config_file(*path));
}

void print_metrics(const std::string& label, const Metrics& m) {
  std::printf("%s: goodput %.4f +- %.4f (95%% CI), collision rate %.4f over %zu episodes\n",
              label.c_str(), m.goodput_mean, m.goodput_ci95, m.collision_mean,
              m.goodputs.size());
}

/// Mirrors evaluate_policy but streams every TtiRecord to a trace file.
Metrics evaluate_with_trace(const SimConfig& cfg, MacPolicy& policy,
                            std::int64_t episodes, std::uint64_t seed_base,
                            TraceWriter& trace) {
  std::vector<double> goodputs, collisions;
  const std::uint64_t env_base = derive_seed(seed_base, stream::kEnvEpisode);
  const std::uint64_t lottery_base = derive_seed(seed_base, stream::kLottery);
  for (std::int64_t i = 0; i < episodes; ++i) {
    Env env(cfg, derive_seed(env_base, static_cast<std::uint64_t>(i)));
    RngStream policy_rng(derive_seed(lottery_base, static_cast<std::uint64_t>(i)));
    const EpisodeLog log = run_episode(env, policy, policy_rng);
    for (const auto& rec : log.records) trace.append(rec);
    goodputs.push_back(goodput(log));
    collisions.push_back(collision_rate(log));
  }
  return summarize(std::move(goodputs), std::move(collisions));
}

int cmd_train(const std::optional<std::string>& config_path,
              const std::string& out_dir, std::uint64_t seed,
              std::optional<int> repetitions,
              std::optional<std::int64_t> episodes,
              const std::string& selector) {
  ExperimentPlan plan = plan_from_file(config_path);
  plan.base_seed = seed;
  if (repetitions) plan.repetitions = *repetitions;
  if (episodes) plan.train_episodes = *episodes;
  plan.selector = selector == "last_checkpoint"
                      ? ExperimentPlan::Selector::LastCheckpoint
                      : ExperimentPlan::Selector::HistoricalBest;
  plan.validate();

  DirLock lock(out_dir);
  const json config_json = to_json(plan);
  const std::string hash = manifest_hash(config_json, plan.base_seed,
                                         plan.repetitions);
  write_json_file(fs::path(out_dir) / "manifest.json",
                  make_manifest(config_json, plan.base_seed, plan.repetitions));

  std::printf("training %d repetitions x %lld episodes (n_ue=%d, p=%g)\n",
              plan.repetitions,
              static_cast<long long>(plan.train_episodes), plan.sim.n_ue,
              plan.sim.arrival_prob);
  const auto reps = run_repetitions(plan);

  std::vector<LearningCurvePoint> curve;
  for (int r = 0; r < plan.repetitions; ++r) {
    const auto& rep = reps[static_cast<std::size_t>(r)];
    curve.insert(curve.end(), rep.curve.begin(), rep.curve.end());
    const auto& snap = plan.selector == ExperimentPlan::Selector::LastCheckpoint
                           ? rep.last
                           : rep.best;
    save_checkpoint(fs::path(out_dir) / ("rep" + std::to_string(r) + ".ckpt"),
                    snap, hash);
    std::printf("repetition %d: best eval goodput %.4f at episode %lld\n", r,
                rep.best.eval_goodput,
                static_cast<long long>(rep.best.checkpoint_episode));
  }
  write_curve_csv(fs::path(out_dir) / "curve.csv", curve, hash);

  const ProtocolSnapshot survivor = select_protocol(plan, reps);
  save_checkpoint(fs::path(out_dir) / "best.ckpt", survivor, hash);
  std::printf("survivor: repetition %d, episode %lld, eval goodput %.4f\n",
              survivor.repetition,
              static_cast<long long>(survivor.checkpoint_episode),
              survivor.eval_goodput);
  return 0;
}

int cmd_evaluate(const std::optional<std::string>& checkpoint_path,
                 const std::string& method,
                 const std::optional<std::string>& config_path,
                 std::optional<std::int64_t> episodes, std::uint64_t seed,
                 const std::optional<std::string>& out_dir, bool trace,
                 std::optional<double> pt) {
  ExperimentPlan plan = plan_from_file(config_path);
  if (episodes) plan.test_episodes = *episodes;

  std::unique_ptr<MacPolicy> policy;
  std::optional<AgentSet> agents;
  SimConfig cfg = plan.sim;
  std::string label = method;
  double used_pt = 0.0;

  if (method == "maddpg") {
    if (!checkpoint_path)
      throw ConfigError("evaluate: --method maddpg needs --checkpoint");
    ProtocolSnapshot snap = load_checkpoint(*checkpoint_path);
    if (config_path) {
      // Only load-shape-compatible overrides may differ from the training
      // config (traffic, erasure rate, episode length).
      if (plan.sim.n_ue != snap.sim.n_ue ||
          plan.sim.buffer_capacity != snap.sim.buffer_capacity ||
          plan.sim.dl_vocab_size != snap.sim.dl_vocab_size ||
          plan.sim.ul_vocab_size != snap.sim.ul_vocab_size ||
          plan.sim.history_len != snap.sim.history_len)
        throw CheckpointError(
            CheckpointError::Kind::VersionMismatch,
            "evaluate: config overrides change the agent dimensions");
      snap.sim.arrival_prob = plan.sim.arrival_prob;
      snap.sim.tbler = plan.sim.tbler;
      snap.sim.episode_len = plan.sim.episode_len;
      snap.sim.reward_mag = plan.sim.reward_mag;
    }
    cfg = snap.sim;
    agents.emplace(agents_from_snapshot(snap));
    policy = std::make_unique<LearnedPolicy>(cfg, *agents, ActionMode::Greedy,
                                             snap.train.gumbel_temperature,
                                             nullptr);
  } else if (method == "contention_free") {
    policy = std::make_unique<ContentionFreePolicy>(cfg);
  } else if (method == "contention_based") {
    if (pt) {
      used_pt = *pt;
    } else {
      used_pt = tune_pt(cfg, default_pt_grid(), 500);
      std::printf("tuned p_t = %.2f\n", used_pt);
    }
    policy = std::make_unique<ContentionBasedPolicy>(cfg, used_pt);
    label += " (p_t=" + std::to_string(used_pt) + ")";
  } else {
    throw ConfigError("evaluate: unknown method '" + method + "'");
  }

  Metrics m;
  if (trace) {
    if (!out_dir) throw ConfigError("evaluate: --trace needs --out");
    TraceWriter writer(fs::path(*out_dir) / "trace.jsonl");
    m = evaluate_with_trace(cfg, *policy, plan.test_episodes, seed, writer);
  } else {
    m = evaluate_policy(cfg, *policy, plan.test_episodes, seed);
  }
  print_metrics(label, m);

  if (out_dir) {
    const json config_json = to_json(plan);
    const std::string hash = manifest_hash(config_json, seed, 1);
    SweepRow row{method, cfg.n_ue, cfg.arrival_prob, m.goodput_mean,
                 m.goodput_ci95, m.collision_mean,
                 max_goodput(cfg.arrival_prob, cfg.n_ue)};
    write_results_csv(fs::path(*out_dir) / "results.csv", {&row, 1}, hash);
    write_json_file(fs::path(*out_dir) / "manifest.json",
                    make_manifest(config_json, seed, 1));
  }
  return 0;
}

int cmd_sweep(const std::string& kind,
              const std::optional<std::string>& config_path,
              const std::string& out_dir, std::uint64_t seed,
              std::optional<int> repetitions,
              std::optional<std::int64_t> episodes) {
  ExperimentPlan plan = plan_from_file(config_path);
  plan.base_seed = seed;
  if (repetitions) plan.repetitions = *repetitions;
  if (episodes) plan.train_episodes = *episodes;
  plan.validate();

  DirLock lock(out_dir);
  const json config_json = to_json(plan);
  const std::string hash = manifest_hash(config_json, plan.base_seed,
                                         plan.repetitions);
  write_json_file(fs::path(out_dir) / "manifest.json",
                  make_manifest(config_json, plan.base_seed, plan.repetitions));

  const SweepOutput out =
      kind == "arrival" ? sweep_arrival(plan) : sweep_ues(plan);
  write_results_csv(fs::path(out_dir) / "results.csv", out.rows, hash);
  write_curve_csv(fs::path(out_dir) / "curve.csv", out.curves, hash);
  for (const auto& note : out.notes) std::printf("%s\n", note.c_str());
  for (const auto& r : out.rows)
    std::printf("%-18s n_ue=%d p=%.3f goodput %.4f +- %.4f collisions %.4f bound %.4f\n",
                r.method.c_str(), r.n_ue, r.arrival_prob, r.goodput_mean,
                r.goodput_ci95, r.collision_mean, r.upper_bound);
  return 0;
}

int cmd_tune_pt(const std::optional<std::string>& config_path,
                std::optional<std::int64_t> episodes, std::uint64_t seed) {
  ExperimentPlan plan = plan_from_file(config_path);
  const double best =
      tune_pt(plan.sim, default_pt_grid(), episodes.value_or(500),
              derive_seed(seed, stream::kLottery));
  std::printf("best p_t = %.2f\n", best);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emergent MAC protocol trainer and simulator"};
  app.require_subcommand(1);

  std::optional<std::string> config_path, checkpoint_path, out_opt;
  std::string out_dir, method = "maddpg", selector = "historical_best";
  std::string sweep_kind;
  std::uint64_t seed = 1;
  std::optional<int> repetitions;
  std::optional<std::int64_t> episodes;
  std::optional<double> pt;
  bool trace = false;

  auto* train = app.add_subcommand("train", "train protocols over repetitions");
  train->add_option("--config", config_path, "config JSON file");
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--seed", seed, "base seed");
  train->add_option("--repetitions", repetitions, "override repetition count");
  train->add_option("--episodes", episodes, "override training episode count");
  train->add_option("--selector", selector, "survivor selection rule")
      ->check(CLI::IsMember({"historical_best", "last_checkpoint"}));

  auto* evaluate = app.add_subcommand("evaluate", "test a protocol or baseline");
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file");
  evaluate->add_option("--method", method, "protocol to evaluate")
      ->check(CLI::IsMember({"maddpg", "contention_free", "contention_based"}));
  evaluate->add_option("--config", config_path, "config JSON file");
  evaluate->add_option("--episodes", episodes, "override test episode count");
  evaluate->add_option("--seed", seed, "test seed base");
  evaluate->add_option("--out", out_opt, "write results.csv and manifest here");
  evaluate->add_option("--pt", pt, "contention-based transmit probability");
  evaluate->add_flag("--trace", trace, "write trace.jsonl of every TTI");

  auto* sweep = app.add_subcommand("sweep", "run a scalability sweep");
  sweep->add_option("kind", sweep_kind, "sweep axis")
      ->required()
      ->check(CLI::IsMember({"arrival", "ues"}));
  sweep->add_option("--config", config_path, "config JSON file");
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--seed", seed, "base seed");
  sweep->add_option("--repetitions", repetitions, "override repetition count");
  sweep->add_option("--episodes", episodes, "override training episode count");

  auto* tune = app.add_subcommand("tune-pt", "grid-search the contention-based p_t");
  tune->add_option("--config", config_path, "config JSON file");
  tune->add_option("--episodes", episodes, "episodes per grid point");
  tune->add_option("--seed", seed, "evaluation seed base");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (train->parsed())
      return cmd_train(config_path, out_dir, seed, repetitions, episodes,
                       selector);
    if (evaluate->parsed()) {
      const std::uint64_t eval_seed =
          evaluate->count("--seed") ? seed : ExperimentPlan{}.test_seed_base;
      return cmd_evaluate(checkpoint_path, method, config_path, episodes,
                          eval_seed, out_opt, trace, pt);
    }
    if (sweep->parsed())
      return cmd_sweep(sweep_kind, config_path, out_dir, seed, repetitions,
                       episodes);
    if (tune->parsed()) return cmd_tune_pt(config_path, episodes, seed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckpoint;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
