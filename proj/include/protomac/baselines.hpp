#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "protomac/config.hpp"
#include "protomac/env.hpp"
#include "protomac/rng.hpp"

namespace protomac {

/// Semantic labels the hand-coded protocols assign to the control alphabets
/// of Table-sized vocabularies (|U| = 2, |D| = 3). Learned agents use the
/// same alphabets however they like.
struct VocabularyMap {
  // UCM
  static constexpr int UlNull = 0;
  static constexpr int Sr = 1;
  // DCM
  static constexpr int DlNull = 0;
  static constexpr int Sg = 1;
  static constexpr int Ack = 2;

  static void require(const SimConfig& c) {
    if (c.ul_vocab_size < 2 || c.dl_vocab_size < 3)
      throw ConfigError(
          "baselines need ul_vocab_size >= 2 and dl_vocab_size >= 3");
  }
};

/// Flags a baseline UE derives from its last received DCM and own last action.
struct BaselineUeState {
  bool granted = false;      // last received DCM was a scheduling grant
  bool pending_ack = false;  // transmitted last TTI, acknowledgment possible

  static BaselineUeState from(int last_dcm, UeAction last_action) {
    return {last_dcm == VocabularyMap::Sg, last_action == UeAction::Transmit};
  }
};

/// Contention-free UE: requests whenever the buffer is non-empty, transmits
/// only on a grant, deletes only on an acknowledgment (which preempts a
/// grant).
inline std::pair<UeAction, int> cf_ue_policy(int buffer_len, int last_dcm) {
  const int ucm = buffer_len > 0 ? VocabularyMap::Sr : VocabularyMap::UlNull;
  UeAction action = UeAction::Nothing;
  if (buffer_len > 0 && last_dcm == VocabularyMap::Ack)
    action = UeAction::Delete;
  else if (buffer_len > 0 && last_dcm == VocabularyMap::Sg)
    action = UeAction::Transmit;
  return {action, ucm};
}

/// Contention-free BS, evaluated after this TTI's channel is resolved: a
/// decoded UE gets an ACK and drops out of the grant lottery; one remaining
/// requester, chosen uniformly, gets the grant for the next TTI.
inline std::vector<int> cf_bs_policy(const ChannelOutcome& outcome,
                                     std::span<const int> ucm,
                                     RngStream& rng) {
  std::vector<int> dcm(ucm.size(), VocabularyMap::DlNull);
  std::vector<int> requesters;
  for (std::size_t u = 0; u < ucm.size(); ++u) {
    if (outcome.kind == ChannelKind::Decoded &&
        outcome.ue == static_cast<int>(u)) {
      dcm[u] = VocabularyMap::Ack;  // the decoded UE's SR is ignored
      continue;
    }
    if (ucm[u] == VocabularyMap::Sr) requesters.push_back(static_cast<int>(u));
  }
  if (!requesters.empty()) {
    const auto pick = requesters[static_cast<std::size_t>(
        rng.below(requesters.size()))];
    dcm[static_cast<std::size_t>(pick)] = VocabularyMap::Sg;
  }
  return dcm;
}

/// Contention-based (grant-free) UE: deletes on an ACK, otherwise transmits
/// with probability p_t while the buffer is non-empty. Sends no UCM.
inline std::pair<UeAction, int> cb_ue_policy(int buffer_len, int last_dcm,
                                             double p_t, RngStream& rng) {
  if (p_t < 0.0 || p_t > 1.0)
    throw std::invalid_argument("cb_ue_policy: p_t must be in [0, 1]");
  UeAction action = UeAction::Nothing;
  if (buffer_len > 0 && last_dcm == VocabularyMap::Ack)
    action = UeAction::Delete;
  else if (buffer_len > 0 && rng.bernoulli(p_t))
    action = UeAction::Transmit;
  return {action, VocabularyMap::UlNull};
}

/// Contention-based BS: acknowledges a decoded transmission, nothing else.
inline std::vector<int> cb_bs_policy(const ChannelOutcome& outcome, int n_ue) {
  std::vector<int> dcm(static_cast<std::size_t>(n_ue), VocabularyMap::DlNull);
  if (outcome.kind == ChannelKind::Decoded)
    dcm[static_cast<std::size_t>(outcome.ue)] = VocabularyMap::Ack;
  return dcm;
}

/// Default tuning grid for the contention-based transmission probability:
/// 0.05, 0.10, ..., 1.00.
inline std::vector<double> default_pt_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.05 * i);
  return grid;
}

}  // namespace protomac
