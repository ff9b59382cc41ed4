#pragma once

#include <cmath>
#include <stdexcept>

#include "protomac/mlp.hpp"

namespace protomac {

/// First/second moment accumulators plus the step counter; one per online net.
struct AdamState {
  Mlp m, v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(const Mlp& shape) : m(zeros_like(shape)), v(zeros_like(shape)) {}
};

/// One Adam update with bias correction. Standard defaults beta1=0.9,
/// beta2=0.999, eps=1e-8. Throws on non-finite gradients.
inline void adam_step(Mlp& params, const Mlp& grads, AdamState& state, double lr,
                      double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  params.for_each_array(
      [&](std::vector<double>& p, const std::vector<double>& g,
          std::vector<double>& m, std::vector<double>& v) {
        if (g.size() != p.size())
          throw std::invalid_argument("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (!std::isfinite(g[i]))
            throw std::runtime_error("adam_step: non-finite gradient");
          m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
          v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
          const double m_hat = m[i] / bc1;
          const double v_hat = v[i] / bc2;
          p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
      },
      grads, state.m, state.v);
}

/// target <- tau * online + (1 - tau) * target, every parameter.
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("soft_update: tau must be in [0, 1]");
  target.for_each_array(
      [tau](std::vector<double>& t, const std::vector<double>& o) {
        for (std::size_t i = 0; i < t.size(); ++i)
          t[i] = tau * o[i] + (1.0 - tau) * t[i];
      },
      online);
}

}  // namespace protomac
