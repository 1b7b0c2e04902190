// SPDX-License-Identifier: Apache-2.0
#include "shardlab/sim/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace shardlab::sim {

std::vector<LayerShape> ModelShape::layers() const {
  std::vector<LayerShape> out;
  out.reserve(static_cast<std::size_t>(layer_count));
  for (long long l = 0; l < layer_count; ++l) {
    const long long in = (l == 0) ? input_dim : hidden_dim;
    const long long o = (l == layer_count - 1) ? output_dim : hidden_dim;
    out.push_back({in, o});
  }
  return out;
}

long long ModelShape::param_count() const {
  long long total = 0;
  for (const LayerShape& l : layers()) total += l.param_count();
  return total;
}

long long ModelShape::max_layer_param_count() const {
  long long best = 0;
  for (const LayerShape& l : layers()) best = std::max(best, l.param_count());
  return best;
}

void ModelShape::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1 || layer_count < 1) {
    throw SimError(SimError::Kind::DimNotDivisible, "model dimensions must all be >= 1");
  }
}

TinyModel TinyModel::init(const ModelShape& shape, std::uint64_t seed) {
  shape.validate();
  TinyModel model;
  model.shape = shape;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (const LayerShape& l : shape.layers()) {
    std::vector<double> params(static_cast<std::size_t>(l.param_count()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (long long r = 0; r < l.out; ++r) {
      for (long long c = 0; c < l.in; ++c) {
        params[static_cast<std::size_t>(r * l.in + c)] = dist(rng) * scale;
      }
    }
    // biases start at zero (the tail of params is already zero-initialized)
    model.layer_params.push_back(std::move(params));
  }
  return model;
}

std::vector<double> TinyModel::flat() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(param_count()));
  for (const std::vector<double>& p : layer_params) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void TinyModel::set_flat(const std::vector<double>& values) {
  std::size_t offset = 0;
  for (std::vector<double>& p : layer_params) {
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(offset),
              values.begin() + static_cast<std::ptrdiff_t>(offset + p.size()), p.begin());
    offset += p.size();
  }
}

void dense_forward_rows(const double* params, const LayerShape& shape, const double* input,
                        long long r0, long long r1, double* z) {
  const double* bias = params + shape.out * shape.in;
  for (long long r = r0; r < r1; ++r) {
    const double* row = params + r * shape.in;
    double acc = 0.0;
    for (long long c = 0; c < shape.in; ++c) acc += row[c] * input[c];
    z[r - r0] = acc + bias[r];
  }
}

void dense_forward_cols(const double* params, const LayerShape& shape, const double* input,
                        long long c0, long long c1, double* partial) {
  for (long long r = 0; r < shape.out; ++r) {
    const double* row = params + r * shape.in;
    double acc = 0.0;
    for (long long c = c0; c < c1; ++c) acc += row[c] * input[c];
    partial[r] += acc;
  }
}

void dense_backward_params(const LayerShape& shape, const double* input, const double* dz,
                           long long r0, long long r1, long long c0, long long c1,
                           double* grad, bool with_bias) {
  double* gbias = grad + shape.out * shape.in;
  for (long long r = r0; r < r1; ++r) {
    double* grow = grad + r * shape.in;
    const double d = dz[r];
    for (long long c = c0; c < c1; ++c) grow[c] += d * input[c];
    if (with_bias) gbias[r] += d;
  }
}

void dense_backward_input(const double* params, const LayerShape& shape, const double* dz,
                          long long r0, long long r1, long long c0, long long c1, double* da) {
  for (long long r = r0; r < r1; ++r) {
    const double* row = params + r * shape.in;
    const double d = dz[r];
    for (long long c = c0; c < c1; ++c) da[c] += row[c] * d;
  }
}

std::uint64_t checksum(const std::vector<double>& values) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (double v : values) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      hash ^= (bits >> (8 * i)) & 0xffULL;
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

}  // namespace shardlab::sim
