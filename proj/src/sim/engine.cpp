// SPDX-License-Identifier: Apache-2.0
#include "engine.hpp"

#include <cmath>

namespace shardlab::sim::detail {

Activations make_activations(const ModelShape& shape, std::size_t batch) {
  Activations acts(static_cast<std::size_t>(shape.layer_count) + 1);
  for (auto& level : acts) level.resize(batch);
  return acts;
}

void forward_layer(const LayerShape& shape, const double* params, bool is_last,
                   const std::vector<std::vector<double>>& inputs,
                   std::vector<std::vector<double>>& outputs) {
  const std::size_t batch = inputs.size();
  for (std::size_t s = 0; s < batch; ++s) {
    std::vector<double> z(static_cast<std::size_t>(shape.out));
    dense_forward_rows(params, shape, inputs[s].data(), 0, shape.out, z.data());
    if (!is_last) {
      for (double& v : z) v = tanh_activate(v);
    }
    outputs[s] = std::move(z);
  }
}

double batch_loss(const std::vector<std::vector<double>>& outputs, const Batch& batch) {
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    double sample = 0.0;
    for (std::size_t k = 0; k < outputs[s].size(); ++k) {
      const double d = outputs[s][k] - batch.y[s][k];
      sample += 0.5 * d * d;
    }
    total += sample;
  }
  return total / static_cast<double>(batch.size());
}

std::vector<std::vector<double>> output_delta(const std::vector<std::vector<double>>& outputs,
                                              const Batch& batch) {
  std::vector<std::vector<double>> delta(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    delta[s].resize(outputs[s].size());
    for (std::size_t k = 0; k < outputs[s].size(); ++k) {
      delta[s][k] = outputs[s][k] - batch.y[s][k];
    }
  }
  return delta;
}

void backward_layer(const LayerShape& shape, const double* params, bool is_last,
                    const std::vector<std::vector<double>>& inputs,
                    const std::vector<std::vector<double>>& outputs,
                    std::vector<std::vector<double>>& delta, bool need_input_grad, double* grad) {
  const std::size_t batch = inputs.size();
  for (std::size_t s = 0; s < batch; ++s) {
    std::vector<double>& dz = delta[s];
    if (!is_last) {
      for (std::size_t k = 0; k < dz.size(); ++k) {
        dz[k] *= tanh_derivative_from_output(outputs[s][k]);
      }
    }
    dense_backward_params(shape, inputs[s].data(), dz.data(), 0, shape.out, 0, shape.in, grad,
                          /*with_bias=*/true);
    if (need_input_grad) {
      std::vector<double> da(static_cast<std::size_t>(shape.in), 0.0);
      dense_backward_input(params, shape, dz.data(), 0, shape.out, 0, shape.in, da.data());
      delta[s] = std::move(da);
    }
  }
}

void truncate_precision(std::vector<double>& values) {
  for (double& v : values) {
    if (v == 0.0 || !std::isfinite(v)) continue;
    int exp = 0;
    const double fr = std::frexp(v, &exp);           // fr in [0.5, 1)
    const double scaled = std::ldexp(fr, 9);         // keep ~8 significand bits
    v = std::ldexp(std::nearbyint(scaled), exp - 9);
  }
}

std::vector<std::vector<double>> rotated_sums(
    const std::vector<std::vector<double>>& contributions) {
  const std::size_t n = contributions.size();
  const std::size_t len = contributions.empty() ? 0 : contributions[0].size();
  std::vector<std::vector<double>> out(n, std::vector<double>(len, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::vector<double>& c = contributions[(i + j) % n];
      for (std::size_t k = 0; k < len; ++k) out[i][k] += c[k];
    }
  }
  return out;
}

}  // namespace shardlab::sim::detail
