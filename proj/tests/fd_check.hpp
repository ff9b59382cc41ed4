// Central finite-difference gradient checking over every parameter of an Mlp.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "protomac/mlp.hpp"

namespace fd {

/// Max relative error between `analytic` and central differences of the
/// scalar objective f(net), taken over all parameters. The denominator is
/// max(1, |a|, |g|) so near-zero gradients compare absolutely.
inline double max_param_rel_error(
    protomac::Mlp net, const protomac::Mlp& analytic,
    const std::function<double(const protomac::Mlp&)>& f, double h = 1e-5) {
  double worst = 0.0;
  auto probe = [&](std::vector<double>& arr, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const double saved = arr[i];
      arr[i] = saved + h;
      const double up = f(net);
      arr[i] = saved - h;
      const double down = f(net);
      arr[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({1.0, std::abs(numeric), std::abs(grad[i])});
      worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
    }
  };
  net.for_each_array(
      [&](std::vector<double>& arr, const std::vector<double>& grad) {
        probe(arr, grad);
      },
      analytic);
  return worst;
}

}  // namespace fd
