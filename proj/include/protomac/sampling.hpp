#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "protomac/rng.hpp"

namespace protomac {

/// Partition of an actor's output vector into contiguous categorical groups,
/// e.g. a UE actor emits one group of 3 (environment action) and one group of
/// |U| (the UCM); a BS actor emits N groups of |D|.
struct LogitGroups {
  std::vector<int> sizes;
  std::vector<int> offsets;
  int total = 0;

  LogitGroups() = default;
  explicit LogitGroups(std::vector<int> group_sizes) : sizes(std::move(group_sizes)) {
    offsets.reserve(sizes.size());
    for (int s : sizes) {
      if (s < 2) throw std::invalid_argument("LogitGroups: group size must be >= 2");
      offsets.push_back(total);
      total += s;
    }
  }

  std::size_t count() const { return sizes.size(); }
};

namespace detail {
/// Numerically stable softmax of logits[offset, offset+size) scaled by 1/zeta.
inline void softmax_group(std::span<const double> logits, int offset, int size,
                          double inv_zeta, std::span<double> out) {
  double max_v = logits[offset];
  for (int i = 1; i < size; ++i) max_v = std::max(max_v, logits[offset + i]);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double e = std::exp((logits[offset + i] - max_v) * inv_zeta);
    out[offset + i] = e;
    sum += e;
  }
  for (int i = 0; i < size; ++i) out[offset + i] /= sum;
}
inline int argmax_group(std::span<const double> v, int offset, int size) {
  int best = 0;
  for (int i = 1; i < size; ++i)
    if (v[offset + i] > v[offset + best]) best = i;  // ties go to the lowest index
  return best;
}
}  // namespace detail

struct GumbelSample {
  std::vector<double> soft;  // per group: softmax((logits + g) / zeta)
  std::vector<double> hard;  // per group: one-hot(argmax of soft)
};

/// Gumbel-softmax over each logit group: soft relaxation plus its hard
/// discretization. Straight-through use (hard to the environment, gradients
/// through soft) is the trainer's choice.
inline GumbelSample gumbel_softmax(std::span<const double> logits,
                                   const LogitGroups& groups, double zeta,
                                   RngStream& rng) {
  if (zeta <= 0.0) throw std::invalid_argument("gumbel_softmax: zeta must be > 0");
  if (logits.size() != static_cast<std::size_t>(groups.total))
    throw std::invalid_argument("gumbel_softmax: logits size != groups total");
  std::vector<double> noisy(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) noisy[i] = logits[i] + rng.gumbel();
  GumbelSample s;
  s.soft.assign(logits.size(), 0.0);
  s.hard.assign(logits.size(), 0.0);
  for (std::size_t g = 0; g < groups.count(); ++g) {
    detail::softmax_group(noisy, groups.offsets[g], groups.sizes[g], 1.0 / zeta,
                          s.soft);
    const int a = detail::argmax_group(s.soft, groups.offsets[g], groups.sizes[g]);
    s.hard[static_cast<std::size_t>(groups.offsets[g] + a)] = 1.0;
  }
  return s;
}

/// Per-group argmax one-hot; ties break toward the lowest index.
inline std::vector<double> greedy_select(std::span<const double> logits,
                                         const LogitGroups& groups) {
  if (logits.size() != static_cast<std::size_t>(groups.total))
    throw std::invalid_argument("greedy_select: logits size != groups total");
  std::vector<double> hard(logits.size(), 0.0);
  for (std::size_t g = 0; g < groups.count(); ++g) {
    const int a = detail::argmax_group(logits, groups.offsets[g], groups.sizes[g]);
    hard[static_cast<std::size_t>(groups.offsets[g] + a)] = 1.0;
  }
  return hard;
}

/// Category index of each group in a (hard or soft) action vector.
inline std::vector<int> group_argmax(std::span<const double> v,
                                     const LogitGroups& groups) {
  std::vector<int> ids(groups.count());
  for (std::size_t g = 0; g < groups.count(); ++g)
    ids[g] = detail::argmax_group(v, groups.offsets[g], groups.sizes[g]);
  return ids;
}

}  // namespace protomac
