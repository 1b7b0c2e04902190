// SPDX-License-Identifier: Apache-2.0
#include "shardlab/sim/data.hpp"

#include <random>

namespace shardlab::sim {

DataGen::DataGen(std::uint64_t seed, long long input_dim, long long output_dim)
    : seed_(seed), input_dim_(input_dim), output_dim_(output_dim) {
  std::mt19937_64 rng(seed ^ 0x7465616368657221ULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  teacher_.resize(static_cast<std::size_t>(output_dim * input_dim));
  for (double& w : teacher_) w = dist(rng);
}

Batch DataGen::global_batch(long long step, long long batch_size) const {
  std::mt19937_64 rng(seed_ + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(step + 1));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Batch batch;
  batch.x.resize(static_cast<std::size_t>(batch_size));
  batch.y.resize(static_cast<std::size_t>(batch_size));
  for (long long s = 0; s < batch_size; ++s) {
    std::vector<double> x(static_cast<std::size_t>(input_dim_));
    for (double& v : x) v = dist(rng);
    std::vector<double> y(static_cast<std::size_t>(output_dim_), 0.0);
    for (long long r = 0; r < output_dim_; ++r) {
      double acc = 0.0;
      for (long long c = 0; c < input_dim_; ++c) {
        acc += teacher_[static_cast<std::size_t>(r * input_dim_ + c)] *
               x[static_cast<std::size_t>(c)];
      }
      y[static_cast<std::size_t>(r)] = acc;
    }
    batch.x[static_cast<std::size_t>(s)] = std::move(x);
    batch.y[static_cast<std::size_t>(s)] = std::move(y);
  }
  return batch;
}

Batch DataGen::slice(const Batch& batch, long long shard_count, long long index) {
  const long long total = static_cast<long long>(batch.size());
  const long long begin = index * total / shard_count;
  const long long end = (index + 1) * total / shard_count;
  Batch out;
  out.x.assign(batch.x.begin() + begin, batch.x.begin() + end);
  out.y.assign(batch.y.begin() + begin, batch.y.begin() + end);
  return out;
}

}  // namespace shardlab::sim
