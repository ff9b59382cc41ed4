#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace protomac {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed of a named substream. Every consumer of randomness (arrivals,
/// erasures, weight init, Gumbel noise, replay sampling, baseline lotteries,
/// per-episode seeds) derives its own stream so that changing one leaves the
/// others untouched.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base + 0x9e3779b97f4a7c15ull * (tag + 1));
}

// Fixed stream tags (see derive_seed).
namespace stream {
inline constexpr std::uint64_t kArrivals = 1;
inline constexpr std::uint64_t kChannel = 2;
inline constexpr std::uint64_t kParamInit = 3;
inline constexpr std::uint64_t kGumbel = 4;
inline constexpr std::uint64_t kReplay = 5;
inline constexpr std::uint64_t kLottery = 6;
inline constexpr std::uint64_t kEnvEpisode = 7;
}  // namespace stream

/// mt19937_64 wrapped with draw counting and the handful of variate mappings
/// the project needs. Each call consumes exactly one engine draw, so draw
/// counters can verify that unrelated code paths never touch a stream.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    return eng_();
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1), never exactly 0 or 1.
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard Gumbel variate, -log(-log(U)).
  double gumbel() { return -std::log(-std::log(next_double_open())); }

  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 eng_;
  std::uint64_t draws_ = 0;
};

}  // namespace protomac
