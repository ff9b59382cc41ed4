#pragma once

#include <vector>

#include "protomac/env.hpp"
#include "protomac/policy.hpp"

namespace protomac {

/// Plays one full episode: per TTI, arrivals are drawn, every agent acts
/// simultaneously on its latched information, the channel is resolved, and
/// the DCM hook closes the TTI. `policy_rng` feeds whatever randomness the
/// policy itself needs (baseline lotteries, transmit coins); a greedy learned
/// policy draws nothing from it.
inline EpisodeLog run_episode(Env& env, MacPolicy& policy,
                              RngStream& policy_rng) {
  policy.begin_episode();
  std::vector<int> last_dcm(static_cast<std::size_t>(env.config().n_ue), 0);
  while (!env.done()) {
    env.sample_arrivals();
    const auto obs = env.buffer_lengths();
    const auto decisions = policy.decide_ue(obs, last_dcm, policy_rng);

    std::vector<UeAction> actions(decisions.size());
    std::vector<int> ucm(decisions.size());
    for (std::size_t u = 0; u < decisions.size(); ++u) {
      actions[u] = decisions[u].action;
      ucm[u] = decisions[u].ucm;
    }

    const TtiRecord rec = env.apply_actions_and_reward(
        actions, ucm,
        [&](const ChannelOutcome& outcome, const std::vector<int>& sent_ucm) {
          return policy.decide_dcm(outcome, sent_ucm, policy_rng);
        });
    policy.end_tti(rec);
    last_dcm = rec.dcm;
  }
  policy.finish_episode(env.buffer_lengths());
  return env.log();
}

}  // namespace protomac
