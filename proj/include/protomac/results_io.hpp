#pragma once

#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "protomac/checkpoint.hpp"
#include "protomac/config_io.hpp"
#include "protomac/env.hpp"
#include "protomac/harness.hpp"
#include "protomac/version.hpp"

namespace protomac {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// RFC 4180 writer: CRLF record separators, quoting only where required.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path.string());
  }

  void row(std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
    if (!out_) throw IoError("short CSV write");
  }

  void row(std::initializer_list<std::string> fields) {
    row(std::span<const std::string>(fields.begin(), fields.size()));
  }

  static std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += '"';
    return quoted;
  }

 private:
  std::ofstream out_;
};

/// Shortest round-trip, locale-independent number formatting for CSV cells.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_curve_csv(const std::filesystem::path& path,
                            std::span<const LearningCurvePoint> curve,
                            const std::string& hash) {
  CsvWriter csv(path);
  csv.row({"repetition", "episode", "eval_goodput", "eval_collision_rate",
           "best_so_far", "manifest_hash"});
  for (const auto& p : curve)
    csv.row({std::to_string(p.repetition), std::to_string(p.episode),
             fmt_double(p.eval_goodput), fmt_double(p.eval_collision),
             fmt_double(p.best_so_far), hash});
}

inline void write_results_csv(const std::filesystem::path& path,
                              std::span<const SweepRow> rows,
                              const std::string& hash) {
  CsvWriter csv(path);
  csv.row({"method", "n_ue", "arrival_prob", "goodput_mean", "goodput_ci95",
           "collision_mean", "upper_bound", "manifest_hash"});
  for (const auto& r : rows)
    csv.row({r.method, std::to_string(r.n_ue), fmt_double(r.arrival_prob),
             fmt_double(r.goodput_mean), fmt_double(r.goodput_ci95),
             fmt_double(r.collision_mean), fmt_double(r.upper_bound), hash});
}

/// Every results file produced by a run embeds this manifest's hash; the
/// hash covers the parameters (config, seed, repetitions) and not the
/// timestamp, so identical parameters rerun to identical CSVs.
inline json make_manifest(const json& config, std::uint64_t seed,
                          int repetitions) {
  json m;
  m["tool"] = "protomac";
  m["version"] = std::string(kVersion);
  m["config"] = config;
  m["seed"] = seed;
  m["repetitions"] = repetitions;
  m["hash"] = manifest_hash(config, seed, repetitions);
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  m["created_utc"] = buf;
  return m;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write: " + path.string());
}

inline json tti_record_to_json(const TtiRecord& rec) {
  json actions = json::array();
  for (UeAction a : rec.ue_actions) actions.push_back(static_cast<int>(a));
  json arrivals = json::array();
  for (std::uint8_t a : rec.arrivals) arrivals.push_back(a != 0);
  const char* kind = rec.outcome.kind == ChannelKind::Idle      ? "idle"
                     : rec.outcome.kind == ChannelKind::Decoded ? "decoded"
                                                                : "garbled";
  return json{{"tti", rec.tti},
              {"arrivals", arrivals},
              {"ue_actions", actions},
              {"ucm", rec.ucm},
              {"dcm", rec.dcm},
              {"outcome",
               json{{"kind", kind},
                    {"ue", rec.outcome.ue},
                    {"sdu", rec.outcome.sdu},
                    {"bs_observation", rec.outcome.bs_observation}}},
              {"num_transmitters", rec.num_transmitters},
              {"reward", rec.reward},
              {"bad_deletes", rec.bad_deletes},
              {"new_delivery", rec.new_delivery}};
}

/// One TtiRecord per line.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open trace for writing: " + path.string());
  }
  void append(const TtiRecord& rec) {
    out_ << tti_record_to_json(rec).dump() << "\n";
    if (!out_) throw IoError("short trace write");
  }

 private:
  std::ofstream out_;
};

/// Guards an output directory against concurrent writers for the lifetime of
/// the object. Creation is exclusive; a stale lock must be removed by hand.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir)
      : path_(dir / ".protomac.lock") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
      throw IoError("output directory is locked by another run: " +
                    path_.string());
    std::fprintf(f, "pid %d\n", static_cast<int>(::getpid()));
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace protomac
