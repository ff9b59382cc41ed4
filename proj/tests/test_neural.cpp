#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "fd_check.hpp"
#include "protomac/adam.hpp"
#include "protomac/mlp.hpp"
#include "protomac/sampling.hpp"

using namespace protomac;

namespace {

TEST(InitParamsTest, DeterministicUnderSeed) {
  RngStream a(7), b(7);
  const Mlp x = init_params(87, 5, a);
  const Mlp y = init_params(87, 5, b);
  EXPECT_EQ(x, y);
}

TEST(InitParamsTest, BiasesAreZeroAndWeightsBounded) {
  RngStream rng(3);
  const Mlp net = init_params(64, 4, rng, 64, 64);
  for (double b : net.b1) EXPECT_EQ(b, 0.0);
  for (double b : net.b2) EXPECT_EQ(b, 0.0);
  for (double b : net.b3) EXPECT_EQ(b, 0.0);
  // fan_in = 64 everywhere here: |w| <= 1/8.
  for (double w : net.w1) EXPECT_LE(std::abs(w), 0.125);
  for (double w : net.w2) EXPECT_LE(std::abs(w), 0.125);
  for (double w : net.w3) EXPECT_LE(std::abs(w), 0.125);
}

TEST(InitParamsTest, RejectsBadDims) {
  RngStream rng(1);
  EXPECT_THROW(init_params(0, 1, rng), std::invalid_argument);
  EXPECT_THROW(init_params(1, 0, rng), std::invalid_argument);
}

TEST(ForwardTest, ZeroNetGivesZeroOutput) {
  const Mlp net(4, 3, 8, 8);
  const std::vector<double> x{1.0, -2.0, 0.5, 3.0};
  for (double y : forward(net, x)) EXPECT_EQ(y, 0.0);
}

TEST(ForwardTest, MatchesHandComputedToyNet) {
  Mlp net(2, 1, 2, 2);
  net.w1 = {1.0, -1.0, 0.5, 2.0};
  net.b1 = {0.1, -0.2};
  net.w2 = {1.0, 1.0, -1.0, 0.5};
  net.b2 = {0.0, 0.3};
  net.w3 = {2.0, -1.0};
  net.b3 = {0.5};
  // z1 = (-0.9, 4.3), a1 = (0, 4.3), z2 = (4.3, 2.45) -> y = 6.65
  const auto y = forward(net, std::vector<double>{1.0, 2.0});
  ASSERT_EQ(y.size(), 1u);
  EXPECT_DOUBLE_EQ(y[0], 6.65);
}

TEST(ForwardTest, FirstLayerIsPositivelyHomogeneousWithoutBias) {
  RngStream rng(11);
  Mlp net = init_params(5, 2, rng, 6, 6);
  net.b1.assign(net.b1.size(), 0.0);
  const std::vector<double> x{0.3, -1.2, 0.8, 0.0, 2.0};
  std::vector<double> scaled(x);
  const double c = 2.5;
  for (double& v : scaled) v *= c;
  ForwardTrace t1, t2;
  forward(net, x, t1);
  forward(net, scaled, t2);
  for (std::size_t i = 0; i < t1.z1.size(); ++i)
    EXPECT_NEAR(t2.z1[i], c * t1.z1[i], 1e-12);
}

TEST(ForwardTest, DimensionMismatchThrows) {
  const Mlp net(4, 3, 8, 8);
  EXPECT_THROW(forward(net, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(BackwardTest, ZeroOutputGradGivesZeroParamGrads) {
  RngStream rng(5);
  const Mlp net = init_params(4, 3, rng, 6, 6);
  ForwardTrace trace;
  forward(net, std::vector<double>{1.0, 0.5, -1.0, 2.0}, trace);
  Mlp grads = zeros_like(net);
  backward(net, trace, std::vector<double>{0.0, 0.0, 0.0}, grads);
  grads.for_each_array([](const std::vector<double>& g) {
    for (double v : g) EXPECT_EQ(v, 0.0);
  });
}

TEST(BackwardTest, DoublingOutputGradDoublesEveryGradient) {
  RngStream rng(6);
  const Mlp net = init_params(4, 2, rng, 5, 5);
  ForwardTrace trace;
  forward(net, std::vector<double>{0.2, -0.7, 1.5, 0.1}, trace);
  Mlp g1 = zeros_like(net), g2 = zeros_like(net);
  backward(net, trace, std::vector<double>{1.0, -2.0}, g1);
  backward(net, trace, std::vector<double>{2.0, -4.0}, g2);
  g1.for_each_array(
      [](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
          EXPECT_NEAR(2.0 * a[i], b[i], 1e-12);
      },
      g2);
}

TEST(BackwardTest, MatchesFiniteDifferencesAcrossRandomNets) {
  RngStream rng(0xBEEF);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 2 + static_cast<int>(rng.below(4));
    const int out = 1 + static_cast<int>(rng.below(3));
    const int h1 = 3 + static_cast<int>(rng.below(4));
    const int h2 = 3 + static_cast<int>(rng.below(4));
    const Mlp net = init_params(in, out, rng, h1, h2);
    std::vector<double> x(static_cast<std::size_t>(in));
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    std::vector<double> weight(static_cast<std::size_t>(out));
    for (double& v : weight) v = rng.uniform(-1.0, 1.0);

    ForwardTrace trace;
    forward(net, x, trace);
    Mlp analytic = zeros_like(net);
    backward(net, trace, weight, analytic);

    const double err = fd::max_param_rel_error(
        net, analytic, [&](const Mlp& m) {
          const auto y = forward(m, x);
          double obj = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) obj += weight[i] * y[i];
          return obj;
        });
    EXPECT_LT(err, 1e-4) << "trial " << trial;
  }
}

TEST(BackwardTest, InputGradientMatchesFiniteDifferences) {
  RngStream rng(0xCAFE);
  const Mlp net = init_params(5, 2, rng, 6, 6);
  std::vector<double> x{0.4, -0.9, 1.1, 0.2, -0.3};
  const std::vector<double> weight{0.7, -1.3};
  ForwardTrace trace;
  forward(net, x, trace);
  Mlp grads = zeros_like(net);
  std::vector<double> input_grad;
  backward(net, trace, weight, grads, &input_grad);
  const double h = 1e-5;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const auto up = forward(net, x);
    x[i] = saved - h;
    const auto down = forward(net, x);
    x[i] = saved;
    double numeric = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j)
      numeric += weight[j] * (up[j] - down[j]) / (2.0 * h);
    EXPECT_NEAR(numeric, input_grad[i], 1e-6);
  }
}

TEST(AdamTest, ZeroGradsLeaveParamsUnchanged) {
  RngStream rng(8);
  Mlp net = init_params(3, 2, rng, 4, 4);
  const Mlp before = net;
  AdamState state(net);
  adam_step(net, zeros_like(net), state, 1e-3);
  EXPECT_EQ(net, before);
}

TEST(AdamTest, ZeroLearningRateFreezesParams) {
  RngStream rng(8);
  Mlp net = init_params(3, 2, rng, 4, 4);
  const Mlp before = net;
  AdamState state(net);
  Mlp grads = zeros_like(net);
  grads.for_each_array([](std::vector<double>& g) {
    for (double& v : g) v = 0.37;
  });
  for (int i = 0; i < 5; ++i) adam_step(net, grads, state, 0.0);
  EXPECT_EQ(net, before);
}

TEST(AdamTest, ConstantGradientStepsAreBoundedAndSignConsistent) {
  Mlp net(2, 1, 2, 2);
  AdamState state(net);
  Mlp grads = zeros_like(net);
  grads.for_each_array([](std::vector<double>& g) {
    for (double& v : g) v = 0.5;
  });
  const double lr = 1e-3;
  Mlp prev = net;
  for (int step = 0; step < 200; ++step) {
    adam_step(net, grads, state, lr);
    net.for_each_array(
        [&](const std::vector<double>& now, const std::vector<double>& was) {
          for (std::size_t i = 0; i < now.size(); ++i) {
            const double delta = now[i] - was[i];
            EXPECT_LT(delta, 0.0);  // descending against a positive gradient
            EXPECT_LE(std::abs(delta), lr * 1.0000001);
          }
        },
        prev);
    prev = net;
  }
}

TEST(AdamTest, DeterministicTrajectories) {
  auto run = [] {
    RngStream rng(13);
    Mlp net = init_params(4, 2, rng, 4, 4);
    AdamState state(net);
    for (int i = 0; i < 50; ++i) {
      Mlp grads = zeros_like(net);
      double phase = 0.1 * i;
      grads.for_each_array([&](std::vector<double>& g) {
        for (double& v : g) v = std::sin(phase += 0.3);
      });
      adam_step(net, grads, state, 1e-3);
    }
    return net;
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, NonFiniteGradientThrows) {
  Mlp net(2, 1, 2, 2);
  AdamState state(net);
  Mlp grads = zeros_like(net);
  grads.w1[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(net, grads, state, 1e-3), std::runtime_error);
}

TEST(GumbelSoftmaxTest, SoftEntriesSumToOnePerGroup) {
  RngStream rng(21);
  const LogitGroups groups({3, 2, 4});
  const std::vector<double> logits{0.1, -2.0, 1.0, 3.0, 3.0, -1.0, 0.0, 1.0, 2.0};
  for (int i = 0; i < 50; ++i) {
    const auto s = gumbel_softmax(logits, groups, 1.0, rng);
    for (std::size_t g = 0; g < groups.count(); ++g) {
      double soft_sum = 0.0, hard_sum = 0.0;
      for (int j = 0; j < groups.sizes[g]; ++j) {
        soft_sum += s.soft[static_cast<std::size_t>(groups.offsets[g] + j)];
        hard_sum += s.hard[static_cast<std::size_t>(groups.offsets[g] + j)];
      }
      EXPECT_NEAR(soft_sum, 1.0, 1e-12);
      EXPECT_DOUBLE_EQ(hard_sum, 1.0);
    }
  }
}

TEST(GumbelSoftmaxTest, EqualLogitsSampleUniformly) {
  RngStream rng(22);
  const LogitGroups groups({4});
  const std::vector<double> logits{0.7, 0.7, 0.7, 0.7};
  const int samples = 100000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < samples; ++i) {
    const auto s = gumbel_softmax(logits, groups, 1.0, rng);
    for (int j = 0; j < 4; ++j)
      if (s.hard[static_cast<std::size_t>(j)] == 1.0) ++counts[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < 4; ++j) {
    const double freq = static_cast<double>(counts[static_cast<std::size_t>(j)]) / samples;
    EXPECT_NEAR(freq, 0.25, 0.02);
  }
}

TEST(GumbelSoftmaxTest, HardDistributionMatchesSoftmaxKl) {
  RngStream rng(23);
  const LogitGroups groups({3});
  const std::vector<double> logits{0.5, -0.3, 1.2};
  double max_l = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  std::vector<double> target(3);
  for (int i = 0; i < 3; ++i) z += std::exp(logits[static_cast<std::size_t>(i)] - max_l);
  for (int i = 0; i < 3; ++i)
    target[static_cast<std::size_t>(i)] = std::exp(logits[static_cast<std::size_t>(i)] - max_l) / z;

  const int samples = 1000000;
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < samples; ++i) {
    const auto s = gumbel_softmax(logits, groups, 1.0, rng);
    for (int j = 0; j < 3; ++j) counts[static_cast<std::size_t>(j)] += s.hard[static_cast<std::size_t>(j)];
  }
  double kl = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double p = counts[static_cast<std::size_t>(j)] / samples;
    if (p > 0.0) kl += p * std::log(p / target[static_cast<std::size_t>(j)]);
  }
  EXPECT_LT(kl, 1e-3);
}

TEST(GumbelSoftmaxTest, LowTemperatureSharpensTowardArgmax) {
  RngStream rng(24);
  const LogitGroups groups({3});
  // Gaps large against Gumbel noise: the hard sample is the plain argmax
  // essentially always, and the soft sample saturates as zeta -> 0+.
  const std::vector<double> logits{20.0, 0.0, -20.0};
  for (int i = 0; i < 10000; ++i) {
    const auto s = gumbel_softmax(logits, groups, 0.01, rng);
    EXPECT_EQ(s.hard[0], 1.0);
    EXPECT_GT(s.soft[0], 0.99);
  }
}

TEST(GumbelSoftmaxTest, RejectsNonPositiveTemperature) {
  RngStream rng(1);
  const LogitGroups groups({2});
  EXPECT_THROW(gumbel_softmax(std::vector<double>{0.0, 1.0}, groups, 0.0, rng),
               std::invalid_argument);
}

TEST(GreedySelectTest, PicksArgmaxPerGroup) {
  const LogitGroups groups({3});
  EXPECT_EQ(greedy_select(std::vector<double>{1.0, 3.0, 2.0}, groups),
            (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(GreedySelectTest, TiesBreakTowardLowestIndex) {
  const LogitGroups groups({2});
  EXPECT_EQ(greedy_select(std::vector<double>{2.0, 2.0}, groups),
            (std::vector<double>{1.0, 0.0}));
}

TEST(GreedySelectTest, InvariantUnderPerGroupConstantShift) {
  RngStream rng(31);
  const LogitGroups groups({3, 2, 4});
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(9);
    for (double& v : logits) v = rng.uniform(-5.0, 5.0);
    std::vector<double> shifted = logits;
    for (std::size_t g = 0; g < groups.count(); ++g) {
      const double c = rng.uniform(-100.0, 100.0);
      for (int j = 0; j < groups.sizes[g]; ++j)
        shifted[static_cast<std::size_t>(groups.offsets[g] + j)] += c;
    }
    EXPECT_EQ(greedy_select(logits, groups), greedy_select(shifted, groups));
  }
}

TEST(LogitGroupsTest, RejectsDegenerateGroups) {
  EXPECT_THROW(LogitGroups({3, 1}), std::invalid_argument);
}

}  // namespace
