#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "protomac/config.hpp"
#include "protomac/rng.hpp"

namespace protomac {

enum class UeAction : int { Nothing = 0, Transmit = 1, Delete = 2 };

struct Sdu {
  std::int64_t id = -1;  // unique within an episode
  int arrival_tti = -1;

  bool operator==(const Sdu&) const = default;
};

/// FIFO transmission buffer; length never exceeds buffer_capacity.
struct UeBuffer {
  std::deque<Sdu> queue;

  int size() const { return static_cast<int>(queue.size()); }
  bool empty() const { return queue.empty(); }
  const Sdu& oldest() const { return queue.front(); }
};

enum class ChannelKind : int { Idle = 0, Decoded = 1, Garbled = 2 };

/// Result of one TTI on the shared uplink data channel. bs_observation is the
/// discrete variable the base station sees: 0 idle, u+1 for a decoded
/// transmission from UE u (0-based), N+1 for non-decodable energy.
struct ChannelOutcome {
  ChannelKind kind = ChannelKind::Idle;
  int ue = -1;            // decoding UE, valid when kind == Decoded
  std::int64_t sdu = -1;  // decoded SDU id, valid when kind == Decoded
  int bs_observation = 0;

  bool operator==(const ChannelOutcome&) const = default;
};

/// Resolves the shared channel given the set of actually-transmitting UEs
/// (Transmit actions on non-empty buffers; empty-buffer transmits are no-ops
/// excluded upstream). Two or more transmitters always garble each other; a
/// singleton is erased with probability tbler. Transmission never dequeues.
inline ChannelOutcome resolve_channel(
    std::span<const std::pair<int, std::int64_t>> transmitting, int n_ue,
    double tbler, RngStream& rng) {
  ChannelOutcome out;
  if (transmitting.empty()) {
    out.kind = ChannelKind::Idle;
    out.bs_observation = 0;
  } else if (transmitting.size() >= 2 || rng.bernoulli(tbler)) {
    out.kind = ChannelKind::Garbled;
    out.bs_observation = n_ue + 1;
  } else {
    out.kind = ChannelKind::Decoded;
    out.ue = transmitting.front().first;
    out.sdu = transmitting.front().second;
    out.bs_observation = out.ue + 1;
  }
  return out;
}

/// Everything that happened in one TTI.
struct TtiRecord {
  int tti = 0;
  std::vector<std::uint8_t> arrivals;  // per UE, Bernoulli successes
  std::vector<UeAction> ue_actions;
  std::vector<int> ucm;  // per UE, symbol in [0, |U|)
  std::vector<int> dcm;  // per UE, symbol in [0, |D|)
  ChannelOutcome outcome;
  int num_transmitters = 0;  // UEs that actually put energy on the channel
  int reward = 0;
  int bad_deletes = 0;
  bool new_delivery = false;

  bool operator==(const TtiRecord&) const = default;
};

struct EpisodeLog {
  std::vector<TtiRecord> records;
  std::unordered_set<std::int64_t> delivered_ids;
  std::int64_t generated_count = 0;  // SDUs that entered a buffer
  std::int64_t dropped_count = 0;    // arrivals rejected by full buffers
};

/// Unique SDUs delivered per TTI (duplicates excluded by construction).
inline double goodput(const EpisodeLog& log) {
  if (log.records.empty()) return 0.0;
  return static_cast<double>(log.delivered_ids.size()) /
         static_cast<double>(log.records.size());
}

/// Fraction of TTIs in which two or more UEs transmitted simultaneously.
/// An erasure of a singleton transmission is not a collision.
inline double collision_rate(const EpisodeLog& log) {
  if (log.records.empty()) return 0.0;
  std::int64_t collisions = 0;
  for (const auto& rec : log.records)
    if (rec.num_transmitters >= 2) ++collisions;
  return static_cast<double>(collisions) /
         static_cast<double>(log.records.size());
}

/// Average cellwide goodput ceiling: min(p * n, 1), since the base station
/// decodes at most one SDU per TTI.
inline double max_goodput(double p, int n) {
  return std::min(p * static_cast<double>(n), 1.0);
}

/// Chooses the DCM vector for the current TTI after the channel has been
/// resolved. Hand-coded base-station protocols read the fresh outcome and
/// UCMs; a learned base station has already committed its messages and
/// ignores both arguments.
using DcmProvider = std::function<std::vector<int>(
    const ChannelOutcome&, const std::vector<int>&)>;

/// Discrete-time simulation of the cell: SDU arrivals, per-UE FIFO buffers,
/// one contended uplink data channel with erasure, dedicated error-free
/// control channels, and the centralized reward. Deterministic under
/// (config, seed): two identical pairs produce bit-identical episode traces
/// for identical action sequences. Not safe to share across threads; run one
/// instance per worker.
class Env {
 public:
  Env(const SimConfig& config, std::uint64_t seed)
      : config_(config),
        arrival_rng_(derive_seed(seed, stream::kArrivals)),
        channel_rng_(derive_seed(seed, stream::kChannel)),
        buffers_(static_cast<std::size_t>(config.n_ue)) {
    config_.validate();
  }

  const SimConfig& config() const { return config_; }
  int tti() const { return tti_; }
  bool done() const { return tti_ >= config_.episode_len; }
  const EpisodeLog& log() const { return log_; }
  const UeBuffer& buffer(int ue) const {
    return buffers_[static_cast<std::size_t>(ue)];
  }

  /// Per-UE buffer length, the UE-side observation.
  std::vector<int> buffer_lengths() const {
    std::vector<int> lens(buffers_.size());
    for (std::size_t u = 0; u < buffers_.size(); ++u) lens[u] = buffers_[u].size();
    return lens;
  }

  /// Draws this TTI's arrivals; call exactly once per TTI before actions.
  /// A UE receives a new SDU with probability arrival_prob; arrivals into a
  /// full buffer are dropped and tallied.
  std::vector<std::uint8_t> sample_arrivals() {
    if (done()) throw std::logic_error("sample_arrivals: episode already over");
    if (arrivals_sampled_)
      throw std::logic_error("sample_arrivals: already sampled this TTI");
    arrivals_sampled_ = true;
    pending_arrivals_.assign(buffers_.size(), 0);
    for (std::size_t u = 0; u < buffers_.size(); ++u) {
      if (!arrival_rng_.bernoulli(config_.arrival_prob)) continue;
      pending_arrivals_[u] = 1;
      if (buffers_[u].size() >= config_.buffer_capacity) {
        ++log_.dropped_count;
      } else {
        buffers_[u].queue.push_back(Sdu{next_sdu_id_++, tti_});
        ++log_.generated_count;
      }
    }
    return pending_arrivals_;
  }

  /// Completes the TTI: resolves the channel from Transmit actions, applies
  /// Delete actions (each removes the acting UE's oldest SDU; no-op on an
  /// empty buffer), computes the shared reward, and records the control
  /// messages for delivery at t+1. Reward: +R when the decoded SDU is new,
  /// -R for each Delete of an SDU not yet delivered (this TTI's delivery is
  /// registered first), summed.
  TtiRecord apply_actions_and_reward(const std::vector<UeAction>& ue_actions,
                                     const std::vector<int>& ucm,
                                     const DcmProvider& dcm_provider) {
    if (done())
      throw std::logic_error("apply_actions_and_reward: episode already over");
    if (!arrivals_sampled_)
      throw std::logic_error(
          "apply_actions_and_reward: sample_arrivals not called this TTI");
    const auto n = buffers_.size();
    if (ue_actions.size() != n || ucm.size() != n)
      throw std::invalid_argument("apply_actions_and_reward: need one action and one UCM per UE");
    for (int m : ucm)
      if (m < 0 || m >= config_.ul_vocab_size)
        throw std::invalid_argument("apply_actions_and_reward: UCM out of range");

    TtiRecord rec;
    rec.tti = tti_;
    rec.arrivals = pending_arrivals_;
    rec.ue_actions = ue_actions;
    rec.ucm = ucm;

    // Transmit puts the oldest SDU on the channel without dequeuing it.
    std::vector<std::pair<int, std::int64_t>> transmitting;
    for (std::size_t u = 0; u < n; ++u) {
      if (ue_actions[u] == UeAction::Transmit && !buffers_[u].empty())
        transmitting.emplace_back(static_cast<int>(u), buffers_[u].oldest().id);
    }
    rec.num_transmitters = static_cast<int>(transmitting.size());
    rec.outcome =
        resolve_channel(transmitting, config_.n_ue, config_.tbler, channel_rng_);

    if (rec.outcome.kind == ChannelKind::Decoded &&
        !log_.delivered_ids.contains(rec.outcome.sdu)) {
      log_.delivered_ids.insert(rec.outcome.sdu);
      rec.new_delivery = true;
    }

    for (std::size_t u = 0; u < n; ++u) {
      if (ue_actions[u] != UeAction::Delete || buffers_[u].empty()) continue;
      const std::int64_t removed = buffers_[u].oldest().id;
      buffers_[u].queue.pop_front();
      if (!log_.delivered_ids.contains(removed)) ++rec.bad_deletes;
    }

    rec.reward = config_.reward_mag * (rec.new_delivery ? 1 : 0) -
                 config_.reward_mag * rec.bad_deletes;

    rec.dcm = dcm_provider(rec.outcome, rec.ucm);
    if (rec.dcm.size() != n)
      throw std::invalid_argument("apply_actions_and_reward: need one DCM per UE");
    for (int m : rec.dcm)
      if (m < 0 || m >= config_.dl_vocab_size)
        throw std::invalid_argument("apply_actions_and_reward: DCM out of range");

    log_.records.push_back(rec);
    arrivals_sampled_ = false;
    ++tti_;
    return rec;
  }

  /// Convenience overload for callers that decided the DCM vector up front.
  TtiRecord apply_actions_and_reward(const std::vector<UeAction>& ue_actions,
                                     const std::vector<int>& ucm,
                                     const std::vector<int>& dcm) {
    return apply_actions_and_reward(
        ue_actions, ucm,
        [&dcm](const ChannelOutcome&, const std::vector<int>&) { return dcm; });
  }

  std::uint64_t arrival_draws() const { return arrival_rng_.draws(); }
  std::uint64_t channel_draws() const { return channel_rng_.draws(); }

 private:
  SimConfig config_;
  RngStream arrival_rng_;
  RngStream channel_rng_;
  std::vector<UeBuffer> buffers_;
  std::vector<std::uint8_t> pending_arrivals_;
  bool arrivals_sampled_ = false;
  std::int64_t next_sdu_id_ = 0;
  int tti_ = 0;
  EpisodeLog log_;
};

}  // namespace protomac
