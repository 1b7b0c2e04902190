// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace shardlab::sim {

struct Batch {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
  std::size_t size() const { return x.size(); }
};

// Deterministic synthetic regression stream: inputs uniform in [-1, 1], targets
// from a fixed random linear teacher. The global sample order is a pure
// function of (seed, step), so device shards are contiguous slices of one
// well-defined batch — no samples can go missing or be duplicated by
// construction.
class DataGen {
 public:
  DataGen(std::uint64_t seed, long long input_dim, long long output_dim);

  Batch global_batch(long long step, long long batch_size) const;

  // Contiguous per-device slice [index*size/count, (index+1)*size/count).
  static Batch slice(const Batch& batch, long long shard_count, long long index);

 private:
  std::uint64_t seed_;
  long long input_dim_;
  long long output_dim_;
  std::vector<double> teacher_;  // output_dim x input_dim
};

}  // namespace shardlab::sim
