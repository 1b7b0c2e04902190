// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale training model: a dense MLP with tanh hidden activations and a
// linear output layer, squared-error loss. Layer kernels are written so that
// sharded execution (row/column splits, per-layer gathers) reproduces the
// single-device arithmetic bit for bit in the degenerate cases.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shardlab/error.hpp"

namespace shardlab::sim {

struct LayerShape {
  long long in = 0;
  long long out = 0;
  long long param_count() const { return out * in + out; }  // W row-major, then bias
};

struct ModelShape {
  long long input_dim = 8;
  long long hidden_dim = 16;
  long long output_dim = 8;
  long long layer_count = 4;

  std::vector<LayerShape> layers() const;
  long long param_count() const;
  long long max_layer_param_count() const;
  void validate() const;
};

struct TinyModel {
  ModelShape shape;
  std::vector<std::vector<double>> layer_params;  // per layer: W row-major then bias

  static TinyModel init(const ModelShape& shape, std::uint64_t seed);

  long long param_count() const { return shape.param_count(); }
  std::vector<double> flat() const;
  void set_flat(const std::vector<double>& values);
};

// z[r] = (sum_c W[r,c]*a[c]) + b[r] for rows [r0, r1); the bias is added after
// the column sum completes, matching the partial-sum + reduce path.
void dense_forward_rows(const double* params, const LayerShape& shape, const double* input,
                        long long r0, long long r1, double* z);

// partial[r] += sum over columns [c0, c1) of W[r,c]*a[c], all rows, no bias.
void dense_forward_cols(const double* params, const LayerShape& shape, const double* input,
                        long long c0, long long c1, double* partial);

// Accumulates dW[r,c] += dz[r]*a[c] and db[r] += dz[r] for rows [r0, r1),
// columns [c0, c1), into grad (laid out like params). with_bias controls
// whether db is accumulated (row shards own their bias slice; column shards
// replicate the bias and accumulate it exactly once elsewhere).
void dense_backward_params(const LayerShape& shape, const double* input, const double* dz,
                           long long r0, long long r1, long long c0, long long c1,
                           double* grad, bool with_bias);

// da[c] += sum over rows [r0, r1) of W[r,c]*dz[r], for columns [c0, c1).
void dense_backward_input(const double* params, const LayerShape& shape, const double* dz,
                          long long r0, long long r1, long long c0, long long c1, double* da);

inline double tanh_activate(double z) { return std::tanh(z); }
// derivative expressed through the activation value: d tanh(z)/dz = 1 - a^2
inline double tanh_derivative_from_output(double a) { return 1.0 - a * a; }

// Bitwise state fingerprint (FNV-1a over the IEEE-754 bit patterns).
std::uint64_t checksum(const std::vector<double>& values);

}  // namespace shardlab::sim
