#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace protomac {

/// Raised when a configuration violates an invariant; the message names the
/// offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Cell and episode parameterization.
struct SimConfig {
  int n_ue = 2;               // N
  int buffer_capacity = 20;   // B, SDUs
  double arrival_prob = 0.5;  // p, per TTI per UE
  double tbler = 0.1;         // erasure probability of a singleton transmission
  int dl_vocab_size = 3;      // |D|
  int ul_vocab_size = 2;      // |U|
  int episode_len = 24;       // T, TTIs
  int reward_mag = 3;         // R
  int history_len = 3;        // k

  void validate() const {
    if (n_ue < 1) throw ConfigError("n_ue must be >= 1");
    if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
    if (episode_len < 1) throw ConfigError("episode_len must be >= 1");
    if (history_len < 1) throw ConfigError("history_len must be >= 1");
    if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0))
      throw ConfigError("arrival_prob must be in [0, 1]");
    if (!(tbler >= 0.0 && tbler <= 1.0))
      throw ConfigError("tbler must be in [0, 1]");
    if (dl_vocab_size < 1) throw ConfigError("dl_vocab_size must be >= 1");
    if (ul_vocab_size < 1) throw ConfigError("ul_vocab_size must be >= 1");
    if (reward_mag < 1) throw ConfigError("reward_mag must be >= 1");
  }

  bool operator==(const SimConfig&) const = default;
};

/// Trainer hyperparameters.
struct TrainParams {
  std::size_t replay_capacity = 100000;
  int batch_size = 1024;
  int hidden_units = 64;     // per hidden layer, two layers
  int update_every = 96;     // environment steps between update cycles
  double learning_rate = 1e-3;
  double discount = 0.9;     // gamma
  double policy_reg = 1e-3;  // weight on mean squared logits
  double gumbel_temperature = 1.0;  // zeta
  double tau = 1e-3;                // target soft-update factor

  void validate() const {
    if (replay_capacity < 1) throw ConfigError("replay_capacity must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
    if (update_every < 1) throw ConfigError("update_every must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(discount >= 0.0 && discount <= 1.0))
      throw ConfigError("discount must be in [0, 1]");
    if (policy_reg < 0.0) throw ConfigError("policy_reg must be >= 0");
    if (!(gumbel_temperature > 0.0))
      throw ConfigError("gumbel_temperature must be > 0");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
  }

  bool operator==(const TrainParams&) const = default;
};

}  // namespace protomac
