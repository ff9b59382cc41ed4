#pragma once

#include <cstdint>
#include <vector>

#include "protomac/rng.hpp"

namespace protomac {

/// One environment step, all agents. States and executed hard actions are
/// one-hot blocks stored as bytes; the reward is shared. Layout widths come
/// from the config: per-UE state dim, BS state dim, per-UE action dim
/// 3 + |U|, BS action dim N * |D|.
struct Transition {
  std::vector<std::uint8_t> ue_states;       // N x ue_state_dim, concatenated
  std::vector<std::uint8_t> bs_state;        // bs_state_dim
  std::vector<std::uint8_t> ue_actions;      // N x (3 + |U|), concatenated
  std::vector<std::uint8_t> bs_action;       // N * |D|
  std::vector<std::uint8_t> next_ue_states;  // N x ue_state_dim
  std::vector<std::uint8_t> next_bs_state;   // bs_state_dim
  int reward = 0;
  bool terminal = false;  // true at TTI T-1; targets drop the bootstrap term
};

/// Fixed-capacity ring; eviction is oldest-first, sampling is uniform with
/// replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

  void store(Transition&& t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[write_pos_] = std::move(t);
      write_pos_ = (write_pos_ + 1) % capacity_;
    }
  }

  const Transition& sample(RngStream& rng) const {
    return data_[static_cast<std::size_t>(rng.below(data_.size()))];
  }

  /// Raw slot access (storage order, not age order); for tests and stats.
  const Transition& slot(std::size_t i) const { return data_[i]; }

 private:
  std::size_t capacity_;
  std::size_t write_pos_ = 0;
  std::vector<Transition> data_;
};

}  // namespace protomac
