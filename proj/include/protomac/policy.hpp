#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "protomac/baselines.hpp"
#include "protomac/config.hpp"
#include "protomac/env.hpp"
#include "protomac/history.hpp"
#include "protomac/maddpg.hpp"

namespace protomac {

struct UeDecision {
  UeAction action = UeAction::Nothing;
  int ucm = 0;
};

/// Drives every agent of the cell for one episode. Control messages latch
/// for one TTI: decide_ue sees the DCM vector sent in the previous TTI.
/// decide_dcm runs after the current TTI's channel is resolved; hand-coded
/// base stations may read the fresh outcome and UCMs, while the learned base
/// station commits during decide_ue (its state only ever contains previous
/// TTIs) and ignores them.
class MacPolicy {
 public:
  virtual ~MacPolicy() = default;
  virtual void begin_episode() = 0;
  virtual std::vector<UeDecision> decide_ue(std::span<const int> obs,
                                            std::span<const int> last_dcm,
                                            RngStream& rng) = 0;
  virtual std::vector<int> decide_dcm(const ChannelOutcome& outcome,
                                      std::span<const int> ucm,
                                      RngStream& rng) = 0;
  virtual void end_tti(const TtiRecord& rec) { (void)rec; }
  virtual void finish_episode(std::span<const int> final_buffer_lens) {
    (void)final_buffer_lens;
  }
};

/// Scheduled (SR -> SG -> TX -> ACK) protocol over the common interface.
class ContentionFreePolicy : public MacPolicy {
 public:
  explicit ContentionFreePolicy(const SimConfig& cfg) : cfg_(cfg) {
    VocabularyMap::require(cfg);
  }

  void begin_episode() override {}

  std::vector<UeDecision> decide_ue(std::span<const int> obs,
                                    std::span<const int> last_dcm,
                                    RngStream&) override {
    std::vector<UeDecision> out(obs.size());
    for (std::size_t u = 0; u < obs.size(); ++u) {
      auto [action, ucm] = cf_ue_policy(obs[u], last_dcm[u]);
      out[u] = {action, ucm};
    }
    return out;
  }

  std::vector<int> decide_dcm(const ChannelOutcome& outcome,
                              std::span<const int> ucm,
                              RngStream& rng) override {
    return cf_bs_policy(outcome, ucm, rng);
  }

 private:
  SimConfig cfg_;
};

/// Grant-free transmit-with-probability protocol.
class ContentionBasedPolicy : public MacPolicy {
 public:
  ContentionBasedPolicy(const SimConfig& cfg, double p_t)
      : cfg_(cfg), p_t_(p_t) {
    VocabularyMap::require(cfg);
  }

  void begin_episode() override {}

  std::vector<UeDecision> decide_ue(std::span<const int> obs,
                                    std::span<const int> last_dcm,
                                    RngStream& rng) override {
    std::vector<UeDecision> out(obs.size());
    for (std::size_t u = 0; u < obs.size(); ++u) {
      auto [action, ucm] = cb_ue_policy(obs[u], last_dcm[u], p_t_, rng);
      out[u] = {action, ucm};
    }
    return out;
  }

  std::vector<int> decide_dcm(const ChannelOutcome& outcome,
                              std::span<const int>, RngStream&) override {
    return cb_bs_policy(outcome, cfg_.n_ue);
  }

  double p_t() const { return p_t_; }

 private:
  SimConfig cfg_;
  double p_t_;
};

/// Runs the learned agents: maintains the per-agent k-step histories, selects
/// actions from the shared UE actor and the BS actor, and (in Explore mode)
/// assembles one Transition per TTI for a sink. The successor state of step t
/// is the state built at decision time t+1, so emission lags one TTI and the
/// final transition is closed by finish_episode with terminal = true.
class LearnedPolicy : public MacPolicy {
 public:
  using TransitionSink = std::function<void(Transition&&)>;

  LearnedPolicy(const SimConfig& cfg, const AgentSet& agents, ActionMode mode,
                double zeta, RngStream* explore_rng,
                TransitionSink sink = nullptr)
      : cfg_(cfg),
        agents_(agents),
        mode_(mode),
        zeta_(zeta),
        explore_rng_(explore_rng),
        sink_(std::move(sink)) {
    if (mode_ == ActionMode::Explore && explore_rng_ == nullptr)
      throw std::invalid_argument("LearnedPolicy: explore mode needs an rng");
  }

  void begin_episode() override {
    const int n = cfg_.n_ue;
    ue_hist_.assign(static_cast<std::size_t>(n), UeHistory(cfg_.history_len));
    bs_hist_ = BsHistory(cfg_.history_len, n);
    prev_actions_.assign(static_cast<std::size_t>(n), 0);
    prev_ucm_.assign(static_cast<std::size_t>(n), 0);
    prev_dcm_.assign(static_cast<std::size_t>(n), 0);
    prev_channel_obs_ = 0;
    pending_.reset();
  }

  std::vector<UeDecision> decide_ue(std::span<const int> obs,
                                    std::span<const int> last_dcm,
                                    RngStream&) override {
    push_and_encode(obs);
    RngStream dummy;
    RngStream& rng =
        mode_ == ActionMode::Explore ? *explore_rng_ : dummy;
    selection_ = select_actions(agents_, ue_states_, bs_state_, mode_, zeta_, rng);

    std::vector<UeDecision> out(obs.size());
    for (std::size_t u = 0; u < obs.size(); ++u) {
      const auto ids = group_argmax(selection_.ue[u].hard, agents_.ue_groups);
      out[u] = {static_cast<UeAction>(ids[0]), ids[1]};
    }
    dcm_out_ = group_argmax(selection_.bs.hard, agents_.bs_groups);

    if (sink_) {
      close_pending(/*terminal=*/false);
      stash_pending();
    }
    (void)last_dcm;  // already folded into the histories via end_tti
    return out;
  }

  std::vector<int> decide_dcm(const ChannelOutcome&, std::span<const int>,
                              RngStream&) override {
    return dcm_out_;
  }

  void end_tti(const TtiRecord& rec) override {
    for (std::size_t u = 0; u < prev_actions_.size(); ++u) {
      prev_actions_[u] = static_cast<int>(rec.ue_actions[u]);
      prev_ucm_[u] = rec.ucm[u];
      prev_dcm_[u] = rec.dcm[u];
    }
    prev_channel_obs_ = rec.outcome.bs_observation;
    if (pending_) pending_->reward = rec.reward;
  }

  void finish_episode(std::span<const int> final_buffer_lens) override {
    if (!sink_ || !pending_) return;
    // Successor state after the last TTI: no further arrivals are drawn.
    push_and_encode(final_buffer_lens);
    close_pending(/*terminal=*/true);
  }

  /// States encoded at the latest decision point (UEs then BS); exposed for
  /// tests.
  std::span<const AgentState> ue_states() const { return ue_states_; }
  const AgentState& bs_state() const { return bs_state_; }

 private:
  void push_and_encode(std::span<const int> obs) {
    for (std::size_t u = 0; u < ue_hist_.size(); ++u)
      push_ue(ue_hist_[u], obs[u], prev_actions_[u], prev_ucm_[u], prev_dcm_[u],
              cfg_);
    push_bs(bs_hist_, prev_channel_obs_, prev_ucm_, prev_dcm_, cfg_);
    ue_states_.resize(ue_hist_.size());
    for (std::size_t u = 0; u < ue_hist_.size(); ++u)
      ue_states_[u] = encode_ue(ue_hist_[u], cfg_);
    bs_state_ = encode_bs(bs_hist_, cfg_);
  }

  static void append_as_bytes(std::vector<std::uint8_t>& out,
                              const std::vector<double>& v) {
    for (double x : v) out.push_back(x != 0.0 ? 1 : 0);
  }

  void stash_pending() {
    pending_.emplace();
    for (const auto& s : ue_states_) append_as_bytes(pending_->ue_states, s);
    append_as_bytes(pending_->bs_state, bs_state_);
    for (const auto& sel : selection_.ue)
      append_as_bytes(pending_->ue_actions, sel.hard);
    append_as_bytes(pending_->bs_action, selection_.bs.hard);
  }

  void close_pending(bool terminal) {
    if (!pending_) return;
    Transition t = std::move(*pending_);
    pending_.reset();
    for (const auto& s : ue_states_) append_as_bytes(t.next_ue_states, s);
    append_as_bytes(t.next_bs_state, bs_state_);
    t.terminal = terminal;
    sink_(std::move(t));
  }

  SimConfig cfg_;
  const AgentSet& agents_;
  ActionMode mode_;
  double zeta_;
  RngStream* explore_rng_;
  TransitionSink sink_;

  std::vector<UeHistory> ue_hist_;
  BsHistory bs_hist_{1, 1};
  std::vector<int> prev_actions_, prev_ucm_, prev_dcm_;
  int prev_channel_obs_ = 0;

  std::vector<AgentState> ue_states_;
  AgentState bs_state_;
  ActionSelection selection_;
  std::vector<int> dcm_out_;
  std::optional<Transition> pending_;
};

}  // namespace protomac
