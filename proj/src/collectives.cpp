// SPDX-License-Identifier: Apache-2.0
#include "shardlab/collectives.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace shardlab {

ShardRange shard_range(std::size_t length, std::size_t shard_count, std::size_t index) {
  const std::size_t base = length / shard_count;
  const std::size_t extra = length % shard_count;
  const std::size_t begin = index * base + std::min(index, extra);
  const std::size_t size = base + (index < extra ? 1 : 0);
  return {begin, begin + size};
}

DeviceGroup::DeviceGroup(std::vector<int> member_ids) : members_(std::move(member_ids)) {
  if (members_.empty()) {
    throw SimError(SimError::Kind::LengthMismatch, "device group must have at least one member");
  }
  std::set<int> unique(members_.begin(), members_.end());
  if (unique.size() != members_.size()) {
    throw SimError(SimError::Kind::LengthMismatch, "device group members must be distinct");
  }
  meters_.resize(members_.size());
}

unsigned long long DeviceGroup::total_sent_bytes() const {
  unsigned long long total = 0;
  for (const ChannelMeter& m : meters_) total += m.sent_bytes;
  return total;
}

void DeviceGroup::reset_meters() {
  std::fill(meters_.begin(), meters_.end(), ChannelMeter{});
}

void DeviceGroup::check_uniform(const std::vector<Buffer>& buffers) const {
  if (buffers.size() != members_.size()) {
    throw SimError(SimError::Kind::LengthMismatch,
                   "expected one buffer per group member (" + std::to_string(members_.size()) +
                       "), got " + std::to_string(buffers.size()));
  }
  for (const Buffer& b : buffers) {
    if (b.size() != buffers[0].size()) {
      throw SimError(SimError::Kind::LengthMismatch, "buffer lengths differ across members");
    }
    if (b.element_size != buffers[0].element_size) {
      throw SimError(SimError::Kind::LengthMismatch, "element_size differs across members");
    }
  }
}

std::vector<Buffer> DeviceGroup::reduce_scatter(const std::vector<Buffer>& buffers) {
  check_uniform(buffers);
  const std::size_t n = members_.size();
  const std::size_t total = buffers[0].size();
  const long long es = buffers[0].element_size;

  std::vector<std::vector<double>> work(n);
  for (std::size_t i = 0; i < n; ++i) work[i] = buffers[i].elements;

  // Ring scatter-reduce: at step t, member i forwards its partial of chunk
  // (i-1-t) to member i+1, which folds in its local contribution. Chunk c
  // completes its full-ring trip at member c.
  for (std::size_t step = 0; step + 1 < n; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t chunk = (i + 2 * n - 1 - step) % n;
      const ShardRange r = shard_range(total, n, chunk);
      const std::size_t recv = (i + 1) % n;
      for (std::size_t k = r.begin; k < r.end; ++k) work[recv][k] += work[i][k];
      const unsigned long long bytes = r.size() * static_cast<unsigned long long>(es);
      meters_[i].sent_bytes += bytes;
      meters_[recv].received_bytes += bytes;
    }
  }

  std::vector<Buffer> shards(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ShardRange r = shard_range(total, n, i);
    shards[i].elements.assign(work[i].begin() + static_cast<std::ptrdiff_t>(r.begin),
                              work[i].begin() + static_cast<std::ptrdiff_t>(r.end));
    shards[i].element_size = es;
  }
  return shards;
}

Buffer DeviceGroup::all_gather(const std::vector<Buffer>& shards) {
  const std::size_t n = members_.size();
  if (shards.size() != n) {
    throw SimError(SimError::Kind::ShardShapeMismatch,
                   "expected one shard per group member (" + std::to_string(n) + "), got " +
                       std::to_string(shards.size()));
  }
  std::size_t total = 0;
  for (const Buffer& s : shards) {
    total += s.size();
    if (s.element_size != shards[0].element_size) {
      throw SimError(SimError::Kind::ShardShapeMismatch, "element_size differs across shards");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (shards[i].size() != shard_range(total, n, i).size()) {
      throw SimError(SimError::Kind::ShardShapeMismatch,
                     "shard " + std::to_string(i) + " does not match the contiguous shard rule");
    }
  }

  // Ring all-gather: at step t, member i forwards shard (i-t) to member i+1.
  // Values are only relayed, so metering is the whole simulation here.
  const long long es = shards[0].element_size;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t shard = (i + 2 * n - step) % n;
      const unsigned long long bytes =
          shard_range(total, n, shard).size() * static_cast<unsigned long long>(es);
      meters_[i].sent_bytes += bytes;
      meters_[(i + 1) % n].received_bytes += bytes;
    }
  }

  Buffer full;
  full.element_size = es;
  full.elements.reserve(total);
  for (const Buffer& s : shards) {
    full.elements.insert(full.elements.end(), s.elements.begin(), s.elements.end());
  }
  return full;
}

void DeviceGroup::all_reduce(std::vector<Buffer>& buffers) {
  std::vector<Buffer> shards = reduce_scatter(buffers);
  Buffer full = all_gather(shards);
  for (Buffer& b : buffers) b.elements = full.elements;
}

namespace {

unsigned long long chunk_sum_except(std::size_t elements, long long element_size,
                                    std::size_t group_size, std::size_t skipped_chunk) {
  const std::size_t skipped = shard_range(elements, group_size, skipped_chunk).size();
  return (elements - skipped) * static_cast<unsigned long long>(element_size);
}

}  // namespace

unsigned long long expected_reduce_scatter_sent_bytes(std::size_t elements, long long element_size,
                                                      std::size_t group_size,
                                                      std::size_t position) {
  if (group_size <= 1) return 0;
  // Member i forwards every chunk except its own terminal chunk i.
  return chunk_sum_except(elements, element_size, group_size, position);
}

unsigned long long expected_all_gather_sent_bytes(std::size_t elements, long long element_size,
                                                  std::size_t group_size, std::size_t position) {
  if (group_size <= 1) return 0;
  // Member i forwards every shard except shard i+1, which it only receives last.
  return chunk_sum_except(elements, element_size, group_size, (position + 1) % group_size);
}

unsigned long long expected_all_reduce_sent_bytes(std::size_t elements, long long element_size,
                                                  std::size_t group_size, std::size_t position) {
  return expected_reduce_scatter_sent_bytes(elements, element_size, group_size, position) +
         expected_all_gather_sent_bytes(elements, element_size, group_size, position);
}

}  // namespace shardlab
