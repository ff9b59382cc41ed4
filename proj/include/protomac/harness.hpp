#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "protomac/episode.hpp"
#include "protomac/maddpg.hpp"
#include "protomac/policy.hpp"

namespace protomac {

/// Training/evaluation/test protocol parameters. The evaluation and test
/// seed bases are fixed and independent of the per-repetition training
/// streams, so every checkpoint of every repetition of every method scores
/// against identical episode randomness.
struct ExperimentPlan {
  SimConfig sim;
  TrainParams train;
  std::int64_t train_episodes = 100000;
  std::int64_t eval_episodes = 500;
  std::int64_t test_episodes = 5000;
  int repetitions = 8;
  std::int64_t eval_period = 1000;  // training episodes between checkpoints
  std::uint64_t base_seed = 1;
  std::uint64_t eval_seed_base = 0x45564c53;  // shared across methods
  std::uint64_t test_seed_base = 0x54535453;

  enum class Selector { HistoricalBest, LastCheckpoint };
  Selector selector = Selector::HistoricalBest;

  void validate() const {
    sim.validate();
    train.validate();
    if (train_episodes < 1 || eval_episodes < 1 || test_episodes < 1)
      throw ConfigError("episode counts must be >= 1");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (eval_period < 1) throw ConfigError("eval_period must be >= 1");
  }

  std::uint64_t repetition_seed(int repetition) const {
    return derive_seed(base_seed, 1000 + static_cast<std::uint64_t>(repetition));
  }
};

/// A candidate protocol: the four online parameter sets plus the evaluation
/// score they earned (always measured with exploration and learning
/// disabled).
struct ProtocolSnapshot {
  Mlp ue_actor, bs_actor, ue_critic, bs_critic;
  SimConfig sim;
  TrainParams train;
  double eval_goodput = 0.0;
  int repetition = 0;
  std::int64_t checkpoint_episode = 0;
};

struct Metrics {
  double goodput_mean = 0.0;
  double goodput_ci95 = 0.0;  // 95% half-width over episode means
  double collision_mean = 0.0;
  std::vector<double> goodputs;
  std::vector<double> collision_rates;
};

inline Metrics summarize(std::vector<double> goodputs,
                         std::vector<double> collisions) {
  Metrics m;
  m.goodputs = std::move(goodputs);
  m.collision_rates = std::move(collisions);
  const auto n = m.goodputs.size();
  if (n == 0) return m;
  double sum = 0.0, csum = 0.0;
  for (double g : m.goodputs) sum += g;
  for (double c : m.collision_rates) csum += c;
  m.goodput_mean = sum / static_cast<double>(n);
  m.collision_mean = csum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (double g : m.goodputs) ss += (g - m.goodput_mean) * (g - m.goodput_mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    m.goodput_ci95 = 1.96 * sd / std::sqrt(static_cast<double>(n));
  }
  return m;
}

/// Runs `episodes` fixed-seed episodes of `policy` against fresh environments
/// and aggregates goodput and collision rate. Episode i always sees the same
/// arrivals, erasures, and policy-side lottery draws for a given seed base.
inline Metrics evaluate_policy(const SimConfig& cfg, MacPolicy& policy,
                               std::int64_t episodes,
                               std::uint64_t seed_base) {
  std::vector<double> goodputs, collisions;
  goodputs.reserve(static_cast<std::size_t>(episodes));
  collisions.reserve(static_cast<std::size_t>(episodes));
  const std::uint64_t env_base = derive_seed(seed_base, stream::kEnvEpisode);
  const std::uint64_t lottery_base = derive_seed(seed_base, stream::kLottery);
  for (std::int64_t i = 0; i < episodes; ++i) {
    Env env(cfg, derive_seed(env_base, static_cast<std::uint64_t>(i)));
    RngStream policy_rng(derive_seed(lottery_base, static_cast<std::uint64_t>(i)));
    const EpisodeLog log = run_episode(env, policy, policy_rng);
    goodputs.push_back(goodput(log));
    collisions.push_back(collision_rate(log));
  }
  return summarize(std::move(goodputs), std::move(collisions));
}

inline ProtocolSnapshot make_snapshot(const Trainer& trainer, double score,
                                      int repetition, std::int64_t episode) {
  const AgentSet& a = trainer.agents();
  return ProtocolSnapshot{a.ue_actor,      a.bs_actor, a.ue_critic,
                          a.bs_critic,     trainer.sim_config(),
                          trainer.train_params(), score, repetition, episode};
}

/// Rebuilds an agent container around a snapshot's parameters (targets start
/// as copies; optimizer state is fresh) for greedy evaluation.
inline AgentSet agents_from_snapshot(const ProtocolSnapshot& s) {
  RngStream scratch(0);
  AgentSet a = AgentSet::create(s.sim, s.train, scratch);
  a.ue_actor = s.ue_actor;
  a.bs_actor = s.bs_actor;
  a.ue_critic = s.ue_critic;
  a.bs_critic = s.bs_critic;
  a.ue_actor_target = s.ue_actor;
  a.bs_actor_target = s.bs_actor;
  a.ue_critic_target = s.ue_critic;
  a.bs_critic_target = s.bs_critic;
  return a;
}

struct LearningCurvePoint {
  int repetition = 0;
  std::int64_t episode = 0;
  double eval_goodput = 0.0;
  double eval_collision = 0.0;
  double best_so_far = 0.0;
};

struct RepetitionResult {
  std::vector<LearningCurvePoint> curve;
  ProtocolSnapshot best;  // historically best checkpoint of this repetition
  ProtocolSnapshot last;  // final checkpoint
};

/// One full training repetition: train for plan.train_episodes, score the
/// greedy policy on the fixed evaluation set every plan.eval_period episodes
/// (and at the end), and keep the historically best snapshot.
inline RepetitionResult train_repetition(const ExperimentPlan& plan,
                                         int repetition) {
  plan.validate();
  const std::uint64_t rep_seed = plan.repetition_seed(repetition);
  Trainer trainer(plan.sim, plan.train, rep_seed);
  LearnedPolicy explorer(
      plan.sim, trainer.agents(), ActionMode::Explore,
      plan.train.gumbel_temperature, &trainer.gumbel_rng(),
      [&trainer](Transition&& t) { trainer.observe(std::move(t)); });
  LearnedPolicy evaluator(plan.sim, trainer.agents(), ActionMode::Greedy,
                          plan.train.gumbel_temperature, nullptr);

  RepetitionResult result;
  bool have_best = false;
  const std::uint64_t env_base = derive_seed(rep_seed, stream::kEnvEpisode);
  RngStream unused_policy_rng(derive_seed(rep_seed, stream::kLottery));

  for (std::int64_t e = 0; e < plan.train_episodes; ++e) {
    Env env(plan.sim, derive_seed(env_base, static_cast<std::uint64_t>(e)));
    run_episode(env, explorer, unused_policy_rng);

    const bool checkpoint = (e + 1) % plan.eval_period == 0 ||
                            (e + 1) == plan.train_episodes;
    if (!checkpoint) continue;
    const Metrics eval = evaluate_policy(plan.sim, evaluator,
                                         plan.eval_episodes,
                                         plan.eval_seed_base);
    ProtocolSnapshot snap =
        make_snapshot(trainer, eval.goodput_mean, repetition, e + 1);
    if (!have_best || eval.goodput_mean > result.best.eval_goodput) {
      result.best = snap;
      have_best = true;
    }
    result.curve.push_back({repetition, e + 1, eval.goodput_mean,
                            eval.collision_mean, result.best.eval_goodput});
    result.last = std::move(snap);
  }
  return result;
}

/// Runs all repetitions of a plan, in parallel up to the hardware thread
/// count (repetitions share nothing).
inline std::vector<RepetitionResult> run_repetitions(
    const ExperimentPlan& plan) {
  std::vector<RepetitionResult> results(
      static_cast<std::size_t>(plan.repetitions));
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(plan.repetitions)));
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      for (int r = next.fetch_add(1); r < plan.repetitions;
           r = next.fetch_add(1))
        results[static_cast<std::size_t>(r)] = train_repetition(plan, r);
    }));
  }
  for (auto& f : futures) f.get();
  return results;
}

/// Survival of the fittest: the single snapshot with the highest evaluation
/// goodput; ties break toward the lower repetition id, then the earlier
/// checkpoint.
inline const ProtocolSnapshot& select_best(
    std::span<const ProtocolSnapshot> snapshots) {
  if (snapshots.empty())
    throw std::invalid_argument("select_best: no snapshots");
  const ProtocolSnapshot* best = &snapshots[0];
  for (const auto& s : snapshots) {
    if (s.eval_goodput > best->eval_goodput) {
      best = &s;
    } else if (s.eval_goodput == best->eval_goodput &&
               (s.repetition < best->repetition ||
                (s.repetition == best->repetition &&
                 s.checkpoint_episode < best->checkpoint_episode))) {
      best = &s;
    }
  }
  return *best;
}

/// Applies the plan's selector to per-repetition results.
inline ProtocolSnapshot select_protocol(
    const ExperimentPlan& plan, std::span<const RepetitionResult> reps) {
  if (reps.empty()) throw std::invalid_argument("select_protocol: no repetitions");
  std::vector<ProtocolSnapshot> pool;
  pool.reserve(reps.size());
  for (const auto& r : reps)
    pool.push_back(plan.selector == ExperimentPlan::Selector::HistoricalBest
                       ? r.best
                       : r.last);
  return select_best(pool);
}

/// Greedy test pass on the dedicated test seed set.
inline Metrics test_protocol(const ProtocolSnapshot& snapshot,
                             const ExperimentPlan& plan) {
  const AgentSet agents = agents_from_snapshot(snapshot);
  LearnedPolicy policy(snapshot.sim, agents, ActionMode::Greedy,
                       snapshot.train.gumbel_temperature, nullptr);
  return evaluate_policy(snapshot.sim, policy, plan.test_episodes,
                         plan.test_seed_base);
}

inline Metrics test_contention_free(const ExperimentPlan& plan) {
  ContentionFreePolicy policy(plan.sim);
  return evaluate_policy(plan.sim, policy, plan.test_episodes,
                         plan.test_seed_base);
}

inline Metrics test_contention_based(const ExperimentPlan& plan, double p_t) {
  ContentionBasedPolicy policy(plan.sim, p_t);
  return evaluate_policy(plan.sim, policy, plan.test_episodes,
                         plan.test_seed_base);
}

/// Grid search for the contention-based transmission probability: evaluates
/// every candidate on the same fixed-seed episode set and returns the
/// goodput argmax; ties go to the smaller probability.
inline double tune_pt(const SimConfig& cfg, std::span<const double> grid,
                      std::int64_t episodes_per_point,
                      std::uint64_t seed_base = 0x50545445) {
  if (grid.empty()) throw std::invalid_argument("tune_pt: empty grid");
  double best_pt = grid[0];
  double best_goodput = -1.0;
  for (double p_t : grid) {
    ContentionBasedPolicy policy(cfg, p_t);
    const Metrics m = evaluate_policy(cfg, policy, episodes_per_point, seed_base);
    if (m.goodput_mean > best_goodput ||
        (m.goodput_mean == best_goodput && p_t < best_pt)) {
      best_goodput = m.goodput_mean;
      best_pt = p_t;
    }
  }
  return best_pt;
}

// Table-sized sweep axes.
inline const std::vector<double>& arrival_prob_axis() {
  static const std::vector<double> axis{0.083, 0.16, 0.25, 0.33, 0.41, 0.5};
  return axis;
}
inline const std::vector<int>& ue_count_axis() {
  static const std::vector<int> axis{2, 3, 4, 5};
  return axis;
}

struct SweepRow {
  std::string method;
  int n_ue = 0;
  double arrival_prob = 0.0;
  double goodput_mean = 0.0;
  double goodput_ci95 = 0.0;
  double collision_mean = 0.0;
  double upper_bound = 0.0;
};

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::vector<LearningCurvePoint> curves;  // all repetitions, all points
  std::vector<std::string> notes;          // soft checks, tuning results
};

namespace detail {
inline void run_sweep_point(const ExperimentPlan& point, SweepOutput& out) {
  const double bound = max_goodput(point.sim.arrival_prob, point.sim.n_ue);
  auto add_row = [&](const std::string& method, const Metrics& m) {
    out.rows.push_back({method, point.sim.n_ue, point.sim.arrival_prob,
                        m.goodput_mean, m.goodput_ci95, m.collision_mean,
                        bound});
  };

  const auto reps = run_repetitions(point);
  for (const auto& r : reps)
    out.curves.insert(out.curves.end(), r.curve.begin(), r.curve.end());
  const ProtocolSnapshot survivor = select_protocol(point, reps);
  const Metrics learned = test_protocol(survivor, point);
  add_row("maddpg", learned);

  const Metrics cf = test_contention_free(point);
  add_row("contention_free", cf);

  const auto grid = default_pt_grid();
  const double p_t = tune_pt(point.sim, grid, 500);
  const Metrics cb = test_contention_based(point, p_t);
  add_row("contention_based", cb);
  out.notes.push_back("p=" + std::to_string(point.sim.arrival_prob) +
                      " n_ue=" + std::to_string(point.sim.n_ue) +
                      ": tuned p_t=" + std::to_string(p_t));
  if (learned.collision_mean > cb.collision_mean)
    out.notes.push_back(
        "soft check: learned collision rate exceeds contention-based at p=" +
        std::to_string(point.sim.arrival_prob) +
        " n_ue=" + std::to_string(point.sim.n_ue));
}
}  // namespace detail

/// Scales the arrival probability at fixed N: full train/select/test for the
/// learned method plus tuned baselines, one row per (method, point).
inline SweepOutput sweep_arrival(const ExperimentPlan& base) {
  SweepOutput out;
  for (double p : arrival_prob_axis()) {
    ExperimentPlan point = base;
    point.sim.arrival_prob = p;
    detail::run_sweep_point(point, out);
  }
  return out;
}

/// Scales the UE count at a fixed cell load of 16 expected SDUs per episode:
/// p = 16 / (N * T).
inline SweepOutput sweep_ues(const ExperimentPlan& base) {
  SweepOutput out;
  for (int n : ue_count_axis()) {
    ExperimentPlan point = base;
    point.sim.n_ue = n;
    point.sim.arrival_prob =
        16.0 / (static_cast<double>(n) * point.sim.episode_len);
    detail::run_sweep_point(point, out);
  }
  return out;
}

}  // namespace protomac
