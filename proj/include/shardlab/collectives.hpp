// SPDX-License-Identifier: Apache-2.0
//
// Reference ring collectives over simulated in-process devices. Values are
// computed in double precision; byte accounting uses a configurable element
// size so fp16-style cost accounting can be modeled independently of the
// arithmetic. Reduction order is fixed (ascending ring position), so results
// are bitwise reproducible.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shardlab/error.hpp"

namespace shardlab {

// Contiguous shard bounds over `length` elements: the first (length mod n)
// shards take one extra element.
struct ShardRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

ShardRange shard_range(std::size_t length, std::size_t shard_count, std::size_t index);

struct Buffer {
  std::vector<double> elements;
  long long element_size = 8;  // accounting bytes per element

  Buffer() = default;
  explicit Buffer(std::vector<double> values, long long elem_size = 8)
      : elements(std::move(values)), element_size(elem_size) {}
  std::size_t size() const { return elements.size(); }
  unsigned long long bytes() const { return elements.size() * static_cast<unsigned long long>(element_size); }
};

struct ChannelMeter {
  unsigned long long sent_bytes = 0;
  unsigned long long received_bytes = 0;
};

// An ordered group of simulated devices with per-member byte counters.
class DeviceGroup {
 public:
  explicit DeviceGroup(std::vector<int> member_ids);

  const std::vector<int>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  const ChannelMeter& meter(std::size_t position) const { return meters_.at(position); }
  unsigned long long total_sent_bytes() const;
  void reset_meters();

  // Ring All-Reduce: after the call every buffer holds the element-wise sum.
  // Implemented as reduce-scatter followed by all-gather, so the identity
  // all_gather(reduce_scatter(x)) == all_reduce(x) holds bitwise.
  void all_reduce(std::vector<Buffer>& buffers);

  // Ring Reduce-Scatter: returns shard i of the element-wise sum for member i
  // (contiguous shards per shard_range).
  std::vector<Buffer> reduce_scatter(const std::vector<Buffer>& buffers);

  // Ring All-Gather: shards (sized per shard_range over the implied total)
  // are concatenated in member order; every member ends with the full tensor.
  Buffer all_gather(const std::vector<Buffer>& shards);

 private:
  void check_uniform(const std::vector<Buffer>& buffers) const;

  std::vector<int> members_;
  std::vector<ChannelMeter> meters_;
};

// Expected per-member sent bytes under the integer shard rule. For element
// counts divisible by the group size these reduce to the closed forms
// 2*(N-1)/N*|T| (all-reduce) and (N-1)/N*|T| (reduce-scatter, all-gather).
unsigned long long expected_all_reduce_sent_bytes(std::size_t elements, long long element_size,
                                                  std::size_t group_size, std::size_t position);
unsigned long long expected_reduce_scatter_sent_bytes(std::size_t elements, long long element_size,
                                                      std::size_t group_size, std::size_t position);
unsigned long long expected_all_gather_sent_bytes(std::size_t elements, long long element_size,
                                                  std::size_t group_size, std::size_t position);

}  // namespace shardlab
