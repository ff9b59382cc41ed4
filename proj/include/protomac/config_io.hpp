#pragma once

#include <string>

#include <json.hpp>

#include "protomac/config.hpp"
#include "protomac/harness.hpp"

namespace protomac {

using nlohmann::json;

inline json to_json(const SimConfig& c) {
  return json{{"n_ue", c.n_ue},
              {"buffer_capacity", c.buffer_capacity},
              {"arrival_prob", c.arrival_prob},
              {"tbler", c.tbler},
              {"dl_vocab_size", c.dl_vocab_size},
              {"ul_vocab_size", c.ul_vocab_size},
              {"episode_len", c.episode_len},
              {"reward_mag", c.reward_mag},
              {"history_len", c.history_len}};
}

inline json to_json(const TrainParams& t) {
  return json{{"replay_capacity", t.replay_capacity},
              {"batch_size", t.batch_size},
              {"hidden_units", t.hidden_units},
              {"update_every", t.update_every},
              {"learning_rate", t.learning_rate},
              {"discount", t.discount},
              {"policy_reg", t.policy_reg},
              {"gumbel_temperature", t.gumbel_temperature},
              {"tau", t.tau}};
}

inline json to_json(const ExperimentPlan& p) {
  json j = to_json(p.sim);
  j["train"] = to_json(p.train);
  j["plan"] = json{{"train_episodes", p.train_episodes},
                   {"eval_episodes", p.eval_episodes},
                   {"test_episodes", p.test_episodes},
                   {"repetitions", p.repetitions},
                   {"eval_period", p.eval_period}};
  return j;
}

namespace detail {
template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}
inline void reject_unknown(const json& j,
                           std::initializer_list<const char*> known,
                           const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw ConfigError(std::string("config: unknown key '") + key + "' in " +
                        where);
  }
}
}  // namespace detail

inline SimConfig sim_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"n_ue", "buffer_capacity", "arrival_prob", "tbler",
                          "dl_vocab_size", "ul_vocab_size", "episode_len",
                          "reward_mag", "history_len"},
                         "simulation section");
  SimConfig c;
  detail::read_field(j, "n_ue", c.n_ue);
  detail::read_field(j, "buffer_capacity", c.buffer_capacity);
  detail::read_field(j, "arrival_prob", c.arrival_prob);
  detail::read_field(j, "tbler", c.tbler);
  detail::read_field(j, "dl_vocab_size", c.dl_vocab_size);
  detail::read_field(j, "ul_vocab_size", c.ul_vocab_size);
  detail::read_field(j, "episode_len", c.episode_len);
  detail::read_field(j, "reward_mag", c.reward_mag);
  detail::read_field(j, "history_len", c.history_len);
  c.validate();
  return c;
}

inline TrainParams train_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"replay_capacity", "batch_size", "hidden_units",
                          "update_every", "learning_rate", "discount",
                          "policy_reg", "gumbel_temperature", "tau"},
                         "train section");
  TrainParams t;
  detail::read_field(j, "replay_capacity", t.replay_capacity);
  detail::read_field(j, "batch_size", t.batch_size);
  detail::read_field(j, "hidden_units", t.hidden_units);
  detail::read_field(j, "update_every", t.update_every);
  detail::read_field(j, "learning_rate", t.learning_rate);
  detail::read_field(j, "discount", t.discount);
  detail::read_field(j, "policy_reg", t.policy_reg);
  detail::read_field(j, "gumbel_temperature", t.gumbel_temperature);
  detail::read_field(j, "tau", t.tau);
  t.validate();
  return t;
}

/// Full plan from a config document: the simulation fields live at the top
/// level, trainer fields under "train", protocol fields under "plan".
/// Missing fields keep their defaults (the Table values).
inline ExperimentPlan plan_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: document must be an object");
  json sim = j;
  sim.erase("train");
  sim.erase("plan");
  ExperimentPlan p;
  p.sim = sim_from_json(sim);
  if (j.contains("train")) p.train = train_from_json(j.at("train"));
  if (j.contains("plan")) {
    const json& pj = j.at("plan");
    detail::reject_unknown(pj,
                           {"train_episodes", "eval_episodes", "test_episodes",
                            "repetitions", "eval_period"},
                           "plan section");
    detail::read_field(pj, "train_episodes", p.train_episodes);
    detail::read_field(pj, "eval_episodes", p.eval_episodes);
    detail::read_field(pj, "test_episodes", p.test_episodes);
    detail::read_field(pj, "repetitions", p.repetitions);
    detail::read_field(pj, "eval_period", p.eval_period);
  }
  p.validate();
  return p;
}

}  // namespace protomac
