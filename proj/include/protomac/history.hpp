#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "protomac/config.hpp"

namespace protomac {

/// Encoded per-agent feature vector: the concatenation of one-hot blocks over
/// a k-step history. Entries are {0, 1}; soft vectors exist only inside the
/// trainer.
using AgentState = std::vector<double>;

inline int ue_state_dim(const SimConfig& c) {
  return c.history_len *
         ((c.buffer_capacity + 1) + 3 + c.ul_vocab_size + c.dl_vocab_size);
}

inline int bs_state_dim(const SimConfig& c) {
  return c.history_len *
         ((c.n_ue + 2) + c.n_ue * c.ul_vocab_size + c.n_ue * c.dl_vocab_size);
}

/// Sliding k-step window of a UE's observations (buffer sizes), own
/// environment actions, own sent UCMs, and received DCMs. Index 0 is the
/// newest step; a fresh history is zero-padded (the 0-symbol of each
/// alphabet: empty buffer, Nothing, null message).
struct UeHistory {
  std::vector<int> obs;       // in [0, B]
  std::vector<int> actions;   // in [0, 2]
  std::vector<int> sent_ucm;  // in [0, |U|)
  std::vector<int> recv_dcm;  // in [0, |D|)

  explicit UeHistory(int k = 1)
      : obs(static_cast<std::size_t>(k), 0),
        actions(static_cast<std::size_t>(k), 0),
        sent_ucm(static_cast<std::size_t>(k), 0),
        recv_dcm(static_cast<std::size_t>(k), 0) {}
};

/// Base-station window: channel observations plus per-UE message vectors.
struct BsHistory {
  std::vector<int> obs;                    // in [0, N+1]
  std::vector<std::vector<int>> recv_ucm;  // k x N
  std::vector<std::vector<int>> sent_dcm;  // k x N

  BsHistory(int k, int n_ue)
      : obs(static_cast<std::size_t>(k), 0),
        recv_ucm(static_cast<std::size_t>(k),
                 std::vector<int>(static_cast<std::size_t>(n_ue), 0)),
        sent_dcm(static_cast<std::size_t>(k),
                 std::vector<int>(static_cast<std::size_t>(n_ue), 0)) {}
};

namespace detail {
inline void check_symbol(int value, int upper_exclusive, const char* what) {
  if (value < 0 || value >= upper_exclusive)
    throw std::out_of_range(std::string("encode: ") + what + " out of range");
}
template <typename T>
inline void shift_in(std::vector<T>& window, T value) {
  for (std::size_t i = window.size() - 1; i > 0; --i)
    window[i] = std::move(window[i - 1]);
  window[0] = std::move(value);
}
inline void append_one_hot(AgentState& out, int value, int width) {
  for (int i = 0; i < width; ++i) out.push_back(i == value ? 1.0 : 0.0);
}
}  // namespace detail

/// Slides the window one step. `action`, `ucm` are the UE's previous-TTI
/// choices and `dcm_received` is the message arriving now (sent one TTI ago).
inline void push_ue(UeHistory& h, int obs, int action, int ucm,
                    int dcm_received, const SimConfig& c) {
  detail::check_symbol(obs, c.buffer_capacity + 1, "buffer observation");
  detail::check_symbol(action, 3, "action");
  detail::check_symbol(ucm, c.ul_vocab_size, "UCM");
  detail::check_symbol(dcm_received, c.dl_vocab_size, "DCM");
  detail::shift_in(h.obs, obs);
  detail::shift_in(h.actions, action);
  detail::shift_in(h.sent_ucm, ucm);
  detail::shift_in(h.recv_dcm, dcm_received);
}

inline void push_bs(BsHistory& h, int obs, std::vector<int> recv_ucm,
                    std::vector<int> sent_dcm, const SimConfig& c) {
  detail::check_symbol(obs, c.n_ue + 2, "channel observation");
  if (recv_ucm.size() != static_cast<std::size_t>(c.n_ue) ||
      sent_dcm.size() != static_cast<std::size_t>(c.n_ue))
    throw std::out_of_range("encode: message vector length != n_ue");
  for (int m : recv_ucm) detail::check_symbol(m, c.ul_vocab_size, "UCM");
  for (int m : sent_dcm) detail::check_symbol(m, c.dl_vocab_size, "DCM");
  detail::shift_in(h.obs, obs);
  detail::shift_in(h.recv_ucm, std::move(recv_ucm));
  detail::shift_in(h.sent_dcm, std::move(sent_dcm));
}

/// Per step, newest to oldest: one-hot(obs | B+1), one-hot(action | 3),
/// one-hot(ucm | |U|), one-hot(dcm | |D|).
inline AgentState encode_ue(const UeHistory& h, const SimConfig& c) {
  AgentState out;
  out.reserve(static_cast<std::size_t>(ue_state_dim(c)));
  for (std::size_t step = 0; step < h.obs.size(); ++step) {
    detail::append_one_hot(out, h.obs[step], c.buffer_capacity + 1);
    detail::append_one_hot(out, h.actions[step], 3);
    detail::append_one_hot(out, h.sent_ucm[step], c.ul_vocab_size);
    detail::append_one_hot(out, h.recv_dcm[step], c.dl_vocab_size);
  }
  return out;
}

/// Per step, newest to oldest: one-hot(channel obs | N+2), then the N UCM
/// one-hots, then the N DCM one-hots (UE order 0..N-1).
inline AgentState encode_bs(const BsHistory& h, const SimConfig& c) {
  AgentState out;
  out.reserve(static_cast<std::size_t>(bs_state_dim(c)));
  for (std::size_t step = 0; step < h.obs.size(); ++step) {
    detail::append_one_hot(out, h.obs[step], c.n_ue + 2);
    for (int m : h.recv_ucm[step]) detail::append_one_hot(out, m, c.ul_vocab_size);
    for (int m : h.sent_dcm[step]) detail::append_one_hot(out, m, c.dl_vocab_size);
  }
  return out;
}

}  // namespace protomac
