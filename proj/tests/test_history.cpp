#include "protomac/history.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "protomac/rng.hpp"

using namespace protomac;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.n_ue = 2;
  c.buffer_capacity = 3;
  c.history_len = 3;
  return c;
}

TEST(UeHistoryTest, WindowSlidesAndDropsOldest) {
  const SimConfig c = small_config();
  UeHistory h(c.history_len);
  for (int obs : {0, 1, 2, 3}) push_ue(h, obs, 0, 0, 0, c);
  EXPECT_EQ(h.obs, (std::vector<int>{3, 2, 1}));
}

TEST(UeHistoryTest, FreshHistoryIsZeroPadded) {
  UeHistory h(3);
  EXPECT_EQ(h.obs, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(h.actions, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(h.sent_ucm, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(h.recv_dcm, (std::vector<int>{0, 0, 0}));
}

TEST(UeHistoryTest, OutOfRangeSymbolsThrow) {
  const SimConfig c = small_config();
  UeHistory h(c.history_len);
  EXPECT_THROW(push_ue(h, c.buffer_capacity + 1, 0, 0, 0, c), std::out_of_range);
  EXPECT_THROW(push_ue(h, 0, 3, 0, 0, c), std::out_of_range);
  EXPECT_THROW(push_ue(h, 0, 0, c.ul_vocab_size, 0, c), std::out_of_range);
  EXPECT_THROW(push_ue(h, 0, 0, 0, c.dl_vocab_size, c), std::out_of_range);
  EXPECT_THROW(push_ue(h, -1, 0, 0, 0, c), std::out_of_range);
}

TEST(EncodeTest, UeDimensionMatchesFormula) {
  // Table defaults: B = 20, |U| = 2, |D| = 3, k = 3 -> 3 * (21 + 3 + 2 + 3).
  SimConfig c;
  EXPECT_EQ(ue_state_dim(c), 87);
  UeHistory h(c.history_len);
  EXPECT_EQ(encode_ue(h, c).size(), 87u);
  // Independent count: sum the one-hot widths step by step.
  int expected = 0;
  for (int step = 0; step < c.history_len; ++step)
    expected += (c.buffer_capacity + 1) + 3 + c.ul_vocab_size + c.dl_vocab_size;
  EXPECT_EQ(ue_state_dim(c), expected);
}

TEST(EncodeTest, BsDimensionMatchesFormula) {
  SimConfig c;  // N = 2 -> 3 * (4 + 2*2 + 2*3) = 42
  EXPECT_EQ(bs_state_dim(c), 42);
  BsHistory h(c.history_len, c.n_ue);
  EXPECT_EQ(encode_bs(h, c).size(), 42u);

  SimConfig c5;
  c5.n_ue = 5;  // 3 * (7 + 10 + 15) = 96
  EXPECT_EQ(bs_state_dim(c5), 96);
  int expected = 0;
  for (int step = 0; step < c5.history_len; ++step)
    expected += (c5.n_ue + 2) + c5.n_ue * c5.ul_vocab_size +
                c5.n_ue * c5.dl_vocab_size;
  EXPECT_EQ(bs_state_dim(c5), expected);
}

TEST(EncodeTest, FreshHistorySetsFirstPositionOfEveryBlock) {
  const SimConfig c = small_config();
  UeHistory h(c.history_len);
  const AgentState s = encode_ue(h, c);
  // Blocks per step: obs (B+1), action (3), ucm (|U|), dcm (|D|).
  const int widths[] = {c.buffer_capacity + 1, 3, c.ul_vocab_size,
                        c.dl_vocab_size};
  std::size_t pos = 0;
  for (int step = 0; step < c.history_len; ++step) {
    for (int w : widths) {
      EXPECT_EQ(s[pos], 1.0);
      for (int i = 1; i < w; ++i) EXPECT_EQ(s[pos + static_cast<std::size_t>(i)], 0.0);
      pos += static_cast<std::size_t>(w);
    }
  }
  EXPECT_EQ(pos, s.size());
}

TEST(EncodeTest, EveryOneHotBlockSumsToOne) {
  const SimConfig c = small_config();
  UeHistory h(c.history_len);
  push_ue(h, 2, 1, 1, 2, c);
  push_ue(h, 3, 2, 0, 1, c);
  const AgentState s = encode_ue(h, c);
  const int widths[] = {c.buffer_capacity + 1, 3, c.ul_vocab_size,
                        c.dl_vocab_size};
  std::size_t pos = 0;
  for (int step = 0; step < c.history_len; ++step) {
    for (int w : widths) {
      double sum = 0.0;
      for (int i = 0; i < w; ++i) {
        const double v = s[pos + static_cast<std::size_t>(i)];
        EXPECT_TRUE(v == 0.0 || v == 1.0);
        sum += v;
      }
      EXPECT_DOUBLE_EQ(sum, 1.0);
      pos += static_cast<std::size_t>(w);
    }
  }
}

TEST(EncodeTest, OldestObsDifferenceTouchesExactlyTwoCoordinates) {
  const SimConfig c = small_config();
  UeHistory a(c.history_len), b(c.history_len);
  // Fill both with the same three steps, differing only in the first push
  // (which ends up oldest).
  push_ue(a, 1, 0, 0, 0, c);
  push_ue(b, 2, 0, 0, 0, c);
  for (const int obs : {3, 0}) {
    push_ue(a, obs, 1, 1, 2, c);
    push_ue(b, obs, 1, 1, 2, c);
  }
  const AgentState sa = encode_ue(a, c), sb = encode_ue(b, c);
  int diffs = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) diffs += sa[i] != sb[i] ? 1 : 0;
  EXPECT_EQ(diffs, 2);
}

TEST(EncodeTest, PermutingUeIndicesPermutesBlocks) {
  SimConfig c;
  c.n_ue = 2;
  BsHistory h(c.history_len, c.n_ue), swapped(c.history_len, c.n_ue);
  push_bs(h, 1, {1, 0}, {2, 1}, c);
  push_bs(swapped, 1, {0, 1}, {1, 2}, c);

  const AgentState s = encode_bs(h, c), t = encode_bs(swapped, c);
  // Walk both encodings: the channel-observation block matches, the per-UE
  // message blocks swap pairwise, and nothing else changes.
  const int obs_w = c.n_ue + 2, u_w = c.ul_vocab_size, d_w = c.dl_vocab_size;
  std::size_t pos = 0;
  for (int step = 0; step < c.history_len; ++step) {
    for (int i = 0; i < obs_w; ++i, ++pos) EXPECT_EQ(s[pos], t[pos]);
    for (int i = 0; i < u_w; ++i)
      EXPECT_EQ(s[pos + static_cast<std::size_t>(i)],
                t[pos + static_cast<std::size_t>(u_w + i)]);
    for (int i = 0; i < u_w; ++i)
      EXPECT_EQ(s[pos + static_cast<std::size_t>(u_w + i)],
                t[pos + static_cast<std::size_t>(i)]);
    pos += static_cast<std::size_t>(2 * u_w);
    for (int i = 0; i < d_w; ++i)
      EXPECT_EQ(s[pos + static_cast<std::size_t>(i)],
                t[pos + static_cast<std::size_t>(d_w + i)]);
    for (int i = 0; i < d_w; ++i)
      EXPECT_EQ(s[pos + static_cast<std::size_t>(d_w + i)],
                t[pos + static_cast<std::size_t>(i)]);
    pos += static_cast<std::size_t>(2 * d_w);
  }
}

// Test-only decoder: recovers the symbol sequence from an encoding.
struct DecodedUe {
  std::vector<int> obs, actions, ucm, dcm;
  bool operator==(const DecodedUe&) const = default;
};

DecodedUe decode_ue(const AgentState& s, const SimConfig& c) {
  DecodedUe out;
  std::size_t pos = 0;
  auto take = [&](int width) {
    int value = -1;
    for (int i = 0; i < width; ++i)
      if (s[pos + static_cast<std::size_t>(i)] == 1.0) value = i;
    pos += static_cast<std::size_t>(width);
    return value;
  };
  for (int step = 0; step < c.history_len; ++step) {
    out.obs.push_back(take(c.buffer_capacity + 1));
    out.actions.push_back(take(3));
    out.ucm.push_back(take(c.ul_vocab_size));
    out.dcm.push_back(take(c.dl_vocab_size));
  }
  return out;
}

TEST(EncodePropertyTest, EncodeDecodeRoundTrip) {
  const SimConfig c = small_config();
  RngStream rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    UeHistory h(c.history_len);
    DecodedUe truth;
    truth.obs.assign(3, 0);
    truth.actions.assign(3, 0);
    truth.ucm.assign(3, 0);
    truth.dcm.assign(3, 0);
    const int pushes = static_cast<int>(rng.below(6));
    for (int i = 0; i < pushes; ++i) {
      const int obs = static_cast<int>(rng.below(c.buffer_capacity + 1));
      const int act = static_cast<int>(rng.below(3));
      const int ucm = static_cast<int>(rng.below(c.ul_vocab_size));
      const int dcm = static_cast<int>(rng.below(c.dl_vocab_size));
      push_ue(h, obs, act, ucm, dcm, c);
      truth.obs.insert(truth.obs.begin(), obs);
      truth.obs.pop_back();
      truth.actions.insert(truth.actions.begin(), act);
      truth.actions.pop_back();
      truth.ucm.insert(truth.ucm.begin(), ucm);
      truth.ucm.pop_back();
      truth.dcm.insert(truth.dcm.begin(), dcm);
      truth.dcm.pop_back();
    }
    EXPECT_EQ(decode_ue(encode_ue(h, c), c), truth);
  }
}

}  // namespace
