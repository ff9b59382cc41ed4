#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "protomac/adam.hpp"
#include "protomac/config.hpp"
#include "protomac/history.hpp"
#include "protomac/mlp.hpp"
#include "protomac/replay.hpp"
#include "protomac/sampling.hpp"

namespace protomac {

/// Fixed feature and action dimensions for a given cell configuration, plus
/// the centralized-critic input layout. Critic inputs are assembled in a
/// fixed agent order: UE states 0..N-1, BS state, UE actions 0..N-1, BS
/// action.
struct AgentDims {
  int n_ue = 0;
  int ue_state = 0;
  int bs_state = 0;
  int ue_action = 0;  // 3 + |U|
  int bs_action = 0;  // N * |D|
  int critic_in = 0;

  static AgentDims from(const SimConfig& c) {
    AgentDims d;
    d.n_ue = c.n_ue;
    d.ue_state = ue_state_dim(c);
    d.bs_state = bs_state_dim(c);
    d.ue_action = 3 + c.ul_vocab_size;
    d.bs_action = c.n_ue * c.dl_vocab_size;
    d.critic_in = c.n_ue * d.ue_state + d.bs_state + c.n_ue * d.ue_action +
                  d.bs_action;
    return d;
  }

  int action_section() const { return n_ue * ue_state + bs_state; }
  int ue_action_slot(int ue) const { return action_section() + ue * ue_action; }
  int bs_action_slot() const { return action_section() + n_ue * ue_action; }
};

/// The four online parameter sets (one shared UE actor/critic pair plus the
/// BS pair), their targets, and the Adam accumulators. Regardless of N there
/// are exactly four online nets; every UE evaluates the shared pair.
struct AgentSet {
  AgentDims dims;
  LogitGroups ue_groups;  // [3, |U|]
  LogitGroups bs_groups;  // N groups of |D|
  Mlp ue_actor, bs_actor, ue_critic, bs_critic;
  Mlp ue_actor_target, bs_actor_target, ue_critic_target, bs_critic_target;
  AdamState ue_actor_opt, bs_actor_opt, ue_critic_opt, bs_critic_opt;

  static AgentSet create(const SimConfig& cfg, const TrainParams& train,
                         RngStream& init_rng) {
    cfg.validate();
    train.validate();
    AgentSet a;
    a.dims = AgentDims::from(cfg);
    a.ue_groups = LogitGroups({3, cfg.ul_vocab_size});
    a.bs_groups = LogitGroups(std::vector<int>(
        static_cast<std::size_t>(cfg.n_ue), cfg.dl_vocab_size));
    const int h = train.hidden_units;
    a.ue_actor = init_params(a.dims.ue_state, a.dims.ue_action, init_rng, h, h);
    a.bs_actor = init_params(a.dims.bs_state, a.dims.bs_action, init_rng, h, h);
    a.ue_critic = init_params(a.dims.critic_in, 1, init_rng, h, h);
    a.bs_critic = init_params(a.dims.critic_in, 1, init_rng, h, h);
    a.ue_actor_target = a.ue_actor;
    a.bs_actor_target = a.bs_actor;
    a.ue_critic_target = a.ue_critic;
    a.bs_critic_target = a.bs_critic;
    a.ue_actor_opt = AdamState(a.ue_actor);
    a.bs_actor_opt = AdamState(a.bs_actor);
    a.ue_critic_opt = AdamState(a.ue_critic);
    a.bs_critic_opt = AdamState(a.bs_critic);
    return a;
  }
};

enum class ActionMode { Explore, Greedy };

struct ActionSelection {
  std::vector<GumbelSample> ue;  // per UE: (soft, hard)
  GumbelSample bs;
};

/// Decentralized action selection. Explore draws Gumbel-softmax samples at
/// temperature zeta (UEs first, in index order, then the BS, so identical
/// states still get independent noise); Greedy takes per-group argmax and
/// the soft vector degenerates to the hard one.
inline ActionSelection select_actions(const AgentSet& agents,
                                      std::span<const AgentState> ue_states,
                                      const AgentState& bs_state,
                                      ActionMode mode, double zeta,
                                      RngStream& rng) {
  ActionSelection sel;
  sel.ue.resize(ue_states.size());
  for (std::size_t u = 0; u < ue_states.size(); ++u) {
    const auto logits = forward(agents.ue_actor, ue_states[u]);
    if (mode == ActionMode::Explore) {
      sel.ue[u] = gumbel_softmax(logits, agents.ue_groups, zeta, rng);
    } else {
      sel.ue[u].hard = greedy_select(logits, agents.ue_groups);
      sel.ue[u].soft = sel.ue[u].hard;
    }
  }
  const auto logits = forward(agents.bs_actor, bs_state);
  if (mode == ActionMode::Explore) {
    sel.bs = gumbel_softmax(logits, agents.bs_groups, zeta, rng);
  } else {
    sel.bs.hard = greedy_select(logits, agents.bs_groups);
    sel.bs.soft = sel.bs.hard;
  }
  return sel;
}

namespace detail {
inline void append_bytes(std::vector<double>& out,
                         const std::vector<std::uint8_t>& v) {
  for (std::uint8_t b : v) out.push_back(static_cast<double>(b));
}
}  // namespace detail

/// Critic input for one transition, current step: states then actions in the
/// fixed agent order.
inline std::vector<double> assemble_critic_input(const Transition& t,
                                                 const AgentDims& d) {
  std::vector<double> z;
  z.reserve(static_cast<std::size_t>(d.critic_in));
  detail::append_bytes(z, t.ue_states);
  detail::append_bytes(z, t.bs_state);
  detail::append_bytes(z, t.ue_actions);
  detail::append_bytes(z, t.bs_action);
  return z;
}

/// Mean squared error between critic(inputs[j]) and targets[j], with the
/// parameter gradient accumulated into *grads when non-null.
inline double critic_loss_and_grad(const Mlp& critic,
                                   std::span<const std::vector<double>> inputs,
                                   std::span<const double> targets,
                                   Mlp* grads) {
  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  double loss = 0.0;
  ForwardTrace trace;
  std::vector<double> out_grad(1);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    forward(critic, inputs[j], trace);
    const double err = trace.y[0] - targets[j];
    loss += err * err * inv_n;
    if (grads) {
      out_grad[0] = 2.0 * err * inv_n;
      backward(critic, trace, out_grad, *grads);
    }
  }
  return loss;
}

/// One row of an actor update: the agent's own state and the full critic
/// input with everything except the agent's own action slot already filled
/// from the batch.
struct ActorRow {
  std::vector<double> own_state;
  std::vector<double> critic_input;
};

/// The minimized actor objective over the given rows:
///   mean_j [ -Q(critic_input_j with own slot <- soft_j) + reg_j ]
/// where soft_j = softmax((logits_j + noise_j) / zeta) per logit group and
/// reg_j = lambda_reg * mean(logits_j^2). The parameter gradient w.r.t. the
/// actor is accumulated into *actor_grads when non-null; the critic stays
/// fixed. Noise is supplied by the caller so the objective is deterministic
/// (finite-difference checks pin it; passing zeros gives the noiseless
/// relaxation).
inline double actor_objective_and_grad(
    const Mlp& actor, const LogitGroups& groups, const Mlp& critic,
    std::span<const ActorRow> rows,
    std::span<const std::vector<double>> noise, int slot_offset, double zeta,
    double lambda_reg, Mlp* actor_grads) {
  if (rows.empty()) throw std::invalid_argument("actor update: empty batch");
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  const int act_dim = groups.total;
  const double inv_logits = 1.0 / static_cast<double>(act_dim);

  double objective = 0.0;
  ForwardTrace actor_trace, critic_trace;
  Mlp critic_scratch = zeros_like(critic);
  std::vector<double> critic_in, soft(static_cast<std::size_t>(act_dim));
  std::vector<double> critic_out_grad(1, -1.0);
  std::vector<double> critic_in_grad, logit_grad(static_cast<std::size_t>(act_dim));

  for (std::size_t j = 0; j < rows.size(); ++j) {
    forward(actor, rows[j].own_state, actor_trace);
    const std::vector<double>& logits = actor_trace.y;

    std::vector<double> noisy(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
      noisy[i] = logits[i] + noise[j][i];
    for (std::size_t g = 0; g < groups.count(); ++g)
      detail::softmax_group(noisy, groups.offsets[g], groups.sizes[g],
                            1.0 / zeta, soft);

    critic_in = rows[j].critic_input;
    for (int i = 0; i < act_dim; ++i)
      critic_in[static_cast<std::size_t>(slot_offset + i)] = soft[static_cast<std::size_t>(i)];
    forward(critic, critic_in, critic_trace);

    double reg = 0.0;
    for (double l : logits) reg += l * l;
    reg *= lambda_reg * inv_logits;
    objective += (-critic_trace.y[0] + reg) * inv_n;

    if (!actor_grads) continue;
    backward(critic, critic_trace, critic_out_grad, critic_scratch,
             &critic_in_grad);
    // d(-Q)/dsoft, then through the tempered softmax of each group.
    for (std::size_t g = 0; g < groups.count(); ++g) {
      const int off = groups.offsets[g], size = groups.sizes[g];
      double dot = 0.0;
      for (int i = 0; i < size; ++i)
        dot += critic_in_grad[static_cast<std::size_t>(slot_offset + off + i)] *
               soft[static_cast<std::size_t>(off + i)];
      for (int i = 0; i < size; ++i) {
        const double s = soft[static_cast<std::size_t>(off + i)];
        const double gs =
            critic_in_grad[static_cast<std::size_t>(slot_offset + off + i)];
        logit_grad[static_cast<std::size_t>(off + i)] =
            (s * (gs - dot)) / zeta;
      }
    }
    for (int i = 0; i < act_dim; ++i)
      logit_grad[static_cast<std::size_t>(i)] +=
          2.0 * lambda_reg * inv_logits * logits[static_cast<std::size_t>(i)];
    for (double& g : logit_grad) g *= inv_n;
    backward(actor, actor_trace, logit_grad, *actor_grads);
  }
  return objective;
}

/// TD targets for a batch: per row, greedy target-actor actions at the
/// successor states feed the target critic; terminal rows use y = r.
struct CriticBatch {
  std::vector<std::vector<double>> inputs;  // current (x, a)
  std::vector<double> targets_ue, targets_bs;
};

inline CriticBatch build_critic_batch(const AgentSet& a,
                                      std::span<const Transition* const> batch,
                                      double gamma) {
  CriticBatch out;
  out.inputs.reserve(batch.size());
  out.targets_ue.reserve(batch.size());
  out.targets_bs.reserve(batch.size());
  const AgentDims& d = a.dims;
  std::vector<double> z_next(static_cast<std::size_t>(d.critic_in));
  for (const Transition* t : batch) {
    out.inputs.push_back(assemble_critic_input(*t, d));
    if (t->terminal) {
      out.targets_ue.push_back(static_cast<double>(t->reward));
      out.targets_bs.push_back(static_cast<double>(t->reward));
      continue;
    }
    std::size_t pos = 0;
    for (std::uint8_t b : t->next_ue_states) z_next[pos++] = b;
    for (std::uint8_t b : t->next_bs_state) z_next[pos++] = b;
    for (int u = 0; u < d.n_ue; ++u) {
      std::span<const double> x(z_next.data() + u * d.ue_state,
                                static_cast<std::size_t>(d.ue_state));
      const auto logits = forward(a.ue_actor_target, x);
      const auto hard = greedy_select(logits, a.ue_groups);
      for (double v : hard) z_next[pos++] = v;
    }
    {
      std::span<const double> x(
          z_next.data() + d.n_ue * d.ue_state,
          static_cast<std::size_t>(d.bs_state));
      const auto logits = forward(a.bs_actor_target, x);
      const auto hard = greedy_select(logits, a.bs_groups);
      for (double v : hard) z_next[pos++] = v;
    }
    const double q_ue = forward(a.ue_critic_target, z_next)[0];
    const double q_bs = forward(a.bs_critic_target, z_next)[0];
    const double r = static_cast<double>(t->reward);
    out.targets_ue.push_back(r + gamma * q_ue);
    out.targets_bs.push_back(r + gamma * q_bs);
  }
  return out;
}

/// One Adam step on each online critic against its TD targets; returns the
/// pre-step losses (shared UE critic, BS critic). Under parameter sharing
/// the N UE agents' losses coincide, so their average is the single MSE.
inline std::pair<double, double> critic_update(
    AgentSet& a, std::span<const Transition* const> batch, double gamma,
    double lr) {
  if (batch.empty()) throw std::invalid_argument("critic_update: empty batch");
  CriticBatch cb = build_critic_batch(a, batch, gamma);
  Mlp g_ue = zeros_like(a.ue_critic);
  Mlp g_bs = zeros_like(a.bs_critic);
  const double loss_ue =
      critic_loss_and_grad(a.ue_critic, cb.inputs, cb.targets_ue, &g_ue);
  const double loss_bs =
      critic_loss_and_grad(a.bs_critic, cb.inputs, cb.targets_bs, &g_bs);
  adam_step(a.ue_critic, g_ue, a.ue_critic_opt, lr);
  adam_step(a.bs_critic, g_bs, a.bs_critic_opt, lr);
  return {loss_ue, loss_bs};
}

/// Ascends the sampled policy gradient for both actors: each agent's own
/// action is replaced by its online actor's differentiable soft output while
/// the other agents' actions come from the batch; the online critic scores
/// the joint action. The N UE agents' gradients accumulate into the shared
/// actor. Returns the minimized objectives (mean per UE agent, BS).
inline std::pair<double, double> actor_update(
    AgentSet& a, std::span<const Transition* const> batch, double zeta,
    double lambda_reg, double lr, RngStream& noise_rng) {
  if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
  const AgentDims& d = a.dims;

  std::vector<std::vector<double>> base_inputs;
  base_inputs.reserve(batch.size());
  for (const Transition* t : batch)
    base_inputs.push_back(assemble_critic_input(*t, d));

  auto draw_noise = [&noise_rng](std::size_t rows, int width) {
    std::vector<std::vector<double>> noise(rows);
    for (auto& n : noise) {
      n.resize(static_cast<std::size_t>(width));
      for (double& v : n) v = noise_rng.gumbel();
    }
    return noise;
  };

  Mlp g_ue = zeros_like(a.ue_actor);
  double obj_ue = 0.0;
  std::vector<ActorRow> rows(batch.size());
  for (int u = 0; u < d.n_ue; ++u) {
    for (std::size_t j = 0; j < batch.size(); ++j) {
      const Transition* t = batch[j];
      rows[j].own_state.assign(
          t->ue_states.begin() + u * d.ue_state,
          t->ue_states.begin() + (u + 1) * d.ue_state);
      rows[j].critic_input = base_inputs[j];
    }
    const auto noise = draw_noise(batch.size(), d.ue_action);
    obj_ue += actor_objective_and_grad(a.ue_actor, a.ue_groups, a.ue_critic,
                                       rows, noise, d.ue_action_slot(u), zeta,
                                       lambda_reg, &g_ue);
  }
  obj_ue /= static_cast<double>(d.n_ue);

  Mlp g_bs = zeros_like(a.bs_actor);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Transition* t = batch[j];
    rows[j].own_state.assign(t->bs_state.begin(), t->bs_state.end());
    rows[j].critic_input = base_inputs[j];
  }
  const auto noise = draw_noise(batch.size(), d.bs_action);
  const double obj_bs = actor_objective_and_grad(
      a.bs_actor, a.bs_groups, a.bs_critic, rows, noise, d.bs_action_slot(),
      zeta, lambda_reg, &g_bs);

  adam_step(a.ue_actor, g_ue, a.ue_actor_opt, lr);
  adam_step(a.bs_actor, g_bs, a.bs_actor_opt, lr);
  return {obj_ue, obj_bs};
}

/// Eqs. of the target tracking: every target parameter moves tau of the way
/// to its online counterpart.
inline void soft_update_targets(AgentSet& a, double tau) {
  soft_update(a.ue_actor_target, a.ue_actor, tau);
  soft_update(a.bs_actor_target, a.bs_actor, tau);
  soft_update(a.ue_critic_target, a.ue_critic, tau);
  soft_update(a.bs_critic_target, a.bs_critic, tau);
}

/// Owns one training run's agents, replay buffer, and RNG streams, and runs
/// the periodic update cycle. Repetitions run as independent Trainer
/// instances; a Trainer is not shared across threads.
class Trainer {
 public:
  Trainer(const SimConfig& cfg, const TrainParams& train, std::uint64_t seed)
      : cfg_(cfg),
        train_(train),
        init_rng_(derive_seed(seed, stream::kParamInit)),
        gumbel_rng_(derive_seed(seed, stream::kGumbel)),
        replay_rng_(derive_seed(seed, stream::kReplay)),
        agents_(AgentSet::create(cfg, train, init_rng_)),
        buffer_(train.replay_capacity) {}

  AgentSet& agents() { return agents_; }
  const AgentSet& agents() const { return agents_; }
  ReplayBuffer& buffer() { return buffer_; }
  RngStream& gumbel_rng() { return gumbel_rng_; }
  RngStream& replay_rng() { return replay_rng_; }
  const SimConfig& sim_config() const { return cfg_; }
  const TrainParams& train_params() const { return train_; }
  std::int64_t steps_seen() const { return steps_seen_; }
  std::int64_t updates_done() const { return updates_done_; }

  /// Stores one transition; every update_every stored steps, once the buffer
  /// holds at least one batch, runs one (critic, actor, soft-update) cycle.
  void observe(Transition&& t) {
    buffer_.store(std::move(t));
    ++steps_seen_;
    if (steps_seen_ % train_.update_every != 0) return;
    if (buffer_.size() < static_cast<std::size_t>(train_.batch_size)) return;
    update_cycle();
  }

  void update_cycle() {
    std::vector<const Transition*> batch(
        static_cast<std::size_t>(train_.batch_size));
    for (auto& slot : batch) slot = &buffer_.sample(replay_rng_);
    critic_update(agents_, batch, train_.discount, train_.learning_rate);
    actor_update(agents_, batch, train_.gumbel_temperature, train_.policy_reg,
                 train_.learning_rate, gumbel_rng_);
    soft_update_targets(agents_, train_.tau);
    ++updates_done_;
  }

 private:
  SimConfig cfg_;
  TrainParams train_;
  RngStream init_rng_;
  RngStream gumbel_rng_;
  RngStream replay_rng_;
  AgentSet agents_;
  ReplayBuffer buffer_;
  std::int64_t steps_seen_ = 0;
  std::int64_t updates_done_ = 0;
};

}  // namespace protomac
