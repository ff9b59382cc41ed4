#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "protomac/rng.hpp"

namespace protomac {

/// Dense network with exactly two hidden ReLU layers and a linear output
/// (logits for actors, a scalar value for critics). Weights are row-major
/// [rows = next layer, cols = previous layer]; 64-bit floats throughout.
struct Mlp {
  int in = 0, h1 = 0, h2 = 0, out = 0;
  std::vector<double> w1, b1, w2, b2, w3, b3;

  Mlp() = default;
  Mlp(int in_dim, int out_dim, int hidden1, int hidden2)
      : in(in_dim),
        h1(hidden1),
        h2(hidden2),
        out(out_dim),
        w1(static_cast<std::size_t>(hidden1) * in_dim, 0.0),
        b1(static_cast<std::size_t>(hidden1), 0.0),
        w2(static_cast<std::size_t>(hidden2) * hidden1, 0.0),
        b2(static_cast<std::size_t>(hidden2), 0.0),
        w3(static_cast<std::size_t>(out_dim) * hidden2, 0.0),
        b3(static_cast<std::size_t>(out_dim), 0.0) {}

  std::size_t num_params() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
  }

  /// Applies f to every parameter array of this net and, in lockstep, the
  /// matching arrays of others with identical shapes.
  template <typename F, typename... Nets>
  void for_each_array(F&& f, Nets&... others) {
    f(w1, others.w1...);
    f(b1, others.b1...);
    f(w2, others.w2...);
    f(b2, others.b2...);
    f(w3, others.w3...);
    f(b3, others.b3...);
  }

  template <typename F, typename... Nets>
  void for_each_array(F&& f, Nets&... others) const {
    f(w1, others.w1...);
    f(b1, others.b1...);
    f(w2, others.w2...);
    f(b2, others.b2...);
    f(w3, others.w3...);
    f(b3, others.b3...);
  }

  bool operator==(const Mlp&) const = default;
};

/// Weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)); biases zero.
/// Deterministic under the rng stream.
inline Mlp init_params(int in_dim, int out_dim, RngStream& rng, int hidden1 = 64,
                       int hidden2 = 64) {
  if (in_dim < 1 || out_dim < 1 || hidden1 < 1 || hidden2 < 1)
    throw std::invalid_argument("init_params: dims must be >= 1");
  Mlp net(in_dim, out_dim, hidden1, hidden2);
  auto fill = [&rng](std::vector<double>& w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w) v = rng.uniform(-bound, bound);
  };
  fill(net.w1, in_dim);
  fill(net.w2, hidden1);
  fill(net.w3, hidden2);
  return net;
}

/// Intermediates kept by forward for the backward pass.
struct ForwardTrace {
  std::vector<double> x, z1, a1, z2, a2, y;
};

namespace detail {
inline void affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::vector<double>& out) {
  const std::size_t rows = b.size(), cols = x.size();
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}
inline void relu(std::span<const double> z, std::vector<double>& out) {
  out.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
}
}  // namespace detail

inline void forward(const Mlp& net, std::span<const double> input,
                    ForwardTrace& trace) {
  if (input.size() != static_cast<std::size_t>(net.in))
    throw std::invalid_argument("forward: input dimension mismatch");
  trace.x.assign(input.begin(), input.end());
  detail::affine(net.w1, net.b1, trace.x, trace.z1);
  detail::relu(trace.z1, trace.a1);
  detail::affine(net.w2, net.b2, trace.a1, trace.z2);
  detail::relu(trace.z2, trace.a2);
  detail::affine(net.w3, net.b3, trace.a2, trace.y);
}

inline std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  ForwardTrace trace;
  forward(net, input, trace);
  return trace.y;
}

/// Exact gradients of the forward map, accumulated (+=) into `grads`, which
/// must be shaped like `net`. The ReLU subgradient at 0 is 0. When
/// `input_grad` is non-null the gradient w.r.t. the input is written there
/// (overwritten, not accumulated).
inline void backward(const Mlp& net, const ForwardTrace& trace,
                     std::span<const double> output_grad, Mlp& grads,
                     std::vector<double>* input_grad = nullptr) {
  if (output_grad.size() != static_cast<std::size_t>(net.out))
    throw std::invalid_argument("backward: output_grad dimension mismatch");

  // Layer 3 (linear).
  thread_local std::vector<double> d2, d1;
  d2.assign(static_cast<std::size_t>(net.h2), 0.0);
  for (int r = 0; r < net.out; ++r) {
    const double g = output_grad[static_cast<std::size_t>(r)];
    grads.b3[static_cast<std::size_t>(r)] += g;
    double* gw = grads.w3.data() + static_cast<std::size_t>(r) * net.h2;
    const double* w = net.w3.data() + static_cast<std::size_t>(r) * net.h2;
    for (int c = 0; c < net.h2; ++c) {
      gw[c] += g * trace.a2[static_cast<std::size_t>(c)];
      d2[static_cast<std::size_t>(c)] += g * w[c];
    }
  }
  // Layer 2 (ReLU).
  for (int c = 0; c < net.h2; ++c)
    if (trace.z2[static_cast<std::size_t>(c)] <= 0.0) d2[static_cast<std::size_t>(c)] = 0.0;
  d1.assign(static_cast<std::size_t>(net.h1), 0.0);
  for (int r = 0; r < net.h2; ++r) {
    const double g = d2[static_cast<std::size_t>(r)];
    grads.b2[static_cast<std::size_t>(r)] += g;
    if (g == 0.0) continue;
    double* gw = grads.w2.data() + static_cast<std::size_t>(r) * net.h1;
    const double* w = net.w2.data() + static_cast<std::size_t>(r) * net.h1;
    for (int c = 0; c < net.h1; ++c) {
      gw[c] += g * trace.a1[static_cast<std::size_t>(c)];
      d1[static_cast<std::size_t>(c)] += g * w[c];
    }
  }
  // Layer 1 (ReLU).
  for (int c = 0; c < net.h1; ++c)
    if (trace.z1[static_cast<std::size_t>(c)] <= 0.0) d1[static_cast<std::size_t>(c)] = 0.0;
  if (input_grad) input_grad->assign(static_cast<std::size_t>(net.in), 0.0);
  for (int r = 0; r < net.h1; ++r) {
    const double g = d1[static_cast<std::size_t>(r)];
    grads.b1[static_cast<std::size_t>(r)] += g;
    if (g == 0.0) continue;
    double* gw = grads.w1.data() + static_cast<std::size_t>(r) * net.in;
    const double* w = net.w1.data() + static_cast<std::size_t>(r) * net.in;
    for (int c = 0; c < net.in; ++c) {
      gw[c] += g * trace.x[static_cast<std::size_t>(c)];
      if (input_grad) (*input_grad)[static_cast<std::size_t>(c)] += g * w[c];
    }
  }
}

inline Mlp zeros_like(const Mlp& net) { return Mlp(net.in, net.out, net.h1, net.h2); }

}  // namespace protomac
