#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "protomac/config_io.hpp"
#include "protomac/harness.hpp"
#include "protomac/sha1.hpp"

namespace protomac {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian float64");

inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'P', 'M', 'C', 'K'};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { Io, Corrupt, VersionMismatch };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Content hash of the parameters a run was produced under (config + seed).
inline std::string manifest_hash(const json& config, std::uint64_t seed,
                                 int repetitions) {
  json j{{"config", config}, {"seed", seed}, {"repetitions", repetitions}};
  return Sha1::hash(j.dump());
}

namespace detail {
inline void append_net_payload(std::vector<double>& payload, const Mlp& net) {
  net.for_each_array([&payload](const std::vector<double>& arr) {
    payload.insert(payload.end(), arr.begin(), arr.end());
  });
}
inline void read_net_payload(const std::vector<double>& payload,
                             std::size_t& pos, Mlp& net) {
  net.for_each_array([&](std::vector<double>& arr) {
    std::copy(payload.begin() + static_cast<std::ptrdiff_t>(pos),
              payload.begin() + static_cast<std::ptrdiff_t>(pos + arr.size()),
              arr.begin());
    pos += arr.size();
  });
}
}  // namespace detail

/// File layout: magic, u64 little-endian header length, JSON header, then the
/// four online nets' parameters as flat little-endian float64 arrays in the
/// order ue_actor, bs_actor, ue_critic, bs_critic (each w1 b1 w2 b2 w3 b3).
inline void save_checkpoint(const std::filesystem::path& path,
                            const ProtocolSnapshot& snap,
                            const std::string& config_hash = "") {
  json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["sim"] = to_json(snap.sim);
  header["train"] = to_json(snap.train);
  header["eval_goodput"] = snap.eval_goodput;
  header["repetition"] = snap.repetition;
  header["checkpoint_episode"] = snap.checkpoint_episode;
  header["config_hash"] = config_hash;
  auto net_meta = [](const Mlp& n) {
    return json{{"dims", {n.in, n.h1, n.h2, n.out}}};
  };
  header["nets"] = json{{"ue_actor", net_meta(snap.ue_actor)},
                        {"bs_actor", net_meta(snap.bs_actor)},
                        {"ue_critic", net_meta(snap.ue_critic)},
                        {"bs_critic", net_meta(snap.bs_critic)}};
  const std::string header_str = header.dump();

  std::vector<double> payload;
  detail::append_net_payload(payload, snap.ue_actor);
  detail::append_net_payload(payload, snap.bs_actor);
  detail::append_net_payload(payload, snap.ue_critic);
  detail::append_net_payload(payload, snap.bs_critic);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "cannot open checkpoint for writing: " + path.string());
  out.write(kCheckpointMagic, 4);
  const std::uint64_t header_len = header_str.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_str.data(),
            static_cast<std::streamsize>(header_str.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "short write to checkpoint: " + path.string());
}

inline ProtocolSnapshot load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError(CheckpointError::Kind::Io,
                          "cannot open checkpoint: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "not a checkpoint file: " + path.string());
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || header_len == 0 || header_len > (1ull << 24))
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "bad checkpoint header length: " + path.string());
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "truncated checkpoint header: " + path.string());
  json header = json::parse(header_str, nullptr, false);
  if (header.is_discarded())
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "unparsable checkpoint header: " + path.string());
  if (!header.contains("format_version") ||
      header["format_version"].get<int>() != kCheckpointFormatVersion)
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "unsupported checkpoint format version in " +
                              path.string());

  ProtocolSnapshot snap;
  try {
    snap.sim = sim_from_json(header.at("sim"));
    snap.train = train_from_json(header.at("train"));
    snap.eval_goodput = header.at("eval_goodput").get<double>();
    snap.repetition = header.at("repetition").get<int>();
    snap.checkpoint_episode = header.at("checkpoint_episode").get<std::int64_t>();
    auto shape = [&](const char* name) {
      const auto dims = header.at("nets").at(name).at("dims");
      return Mlp(dims.at(0).get<int>(), dims.at(3).get<int>(),
                 dims.at(1).get<int>(), dims.at(2).get<int>());
    };
    snap.ue_actor = shape("ue_actor");
    snap.bs_actor = shape("bs_actor");
    snap.ue_critic = shape("ue_critic");
    snap.bs_critic = shape("bs_critic");
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          std::string("bad checkpoint header fields: ") +
                              e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          std::string("bad checkpoint config: ") + e.what());
  }

  const std::size_t expected =
      snap.ue_actor.num_params() + snap.bs_actor.num_params() +
      snap.ue_critic.num_params() + snap.bs_critic.num_params();
  std::vector<double> payload(expected);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(expected * sizeof(double)))
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "truncated checkpoint payload: " + path.string());
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "trailing bytes in checkpoint: " + path.string());

  std::size_t pos = 0;
  detail::read_net_payload(payload, pos, snap.ue_actor);
  detail::read_net_payload(payload, pos, snap.bs_actor);
  detail::read_net_payload(payload, pos, snap.ue_critic);
  detail::read_net_payload(payload, pos, snap.bs_critic);
  return snap;
}

}  // namespace protomac
