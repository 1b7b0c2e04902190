// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace shardlab::sim {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerParams {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-element moments; sized to the slice the holder owns (sharded optimizer
// state is just a shorter slice). Empty for SGD.
struct OptState {
  std::vector<double> m;
  std::vector<double> v;

  static OptState init(const OptimizerParams& opt, std::size_t owned_elements) {
    OptState state;
    if (opt.kind == OptimizerKind::Adam) {
      state.m.assign(owned_elements, 0.0);
      state.v.assign(owned_elements, 0.0);
    }
    return state;
  }

  std::size_t element_count() const { return m.size() + v.size(); }
};

// Element-wise update of `params` from `grads` (same length as the owned
// slice). `step` is 1-based for Adam bias correction. Sharded and full
// updates produce bitwise-identical values per element.
inline void apply_update(const OptimizerParams& opt, long long step, std::span<double> params,
                         std::span<const double> grads, OptState& state) {
  if (opt.kind == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= opt.lr * grads[i];
    return;
  }
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * g;
    state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

}  // namespace shardlab::sim
