// SPDX-License-Identifier: Apache-2.0
//
// Derivation rules: per-device memory and per-step communication volume,
// computed from a placement specification alone. All byte math is exact
// rational arithmetic.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "shardlab/placement.hpp"
#include "shardlab/profiles.hpp"
#include "shardlab/rational.hpp"

namespace shardlab {

struct MuResult {
  Rational persistent;
  Rational transient;
  Rational gpu_total() const { return persistent + transient; }
};

// Per-device GPU memory of one state tensor of `size` bytes under `mode`:
//   R  -> (size, 0)
//   S  -> (size/N, 0)
//   S* -> (size/N, prefetch_depth * s_unit)
//   M  -> (0, s_unit)
//   O  -> (0, 0)
// prefetch_depth models gather/compute pipelining (2 = double-buffered).
MuResult mu(PlacementMode mode, Rational size, long long device_count, Rational s_unit,
            long long prefetch_depth = 1);

struct StateMemory {
  PlacementMode mode = PlacementMode::Replicated;
  Rational persistent_bytes;
  Rational transient_bytes;
};

struct MemoryReport {
  std::map<StateKind, StateMemory> per_state;
  Rational total_gpu_bytes;       // sum of persistent + transient over the four states
  Rational offloaded_bytes;       // host-side bytes of mode-O states; never in total_gpu_bytes
  Rational model_state_persistent_bytes;  // theta + omega + grad, persistent only
  Rational model_state_total_bytes;       // theta + omega + grad, persistent + transient
};

struct MemoryOptions {
  // Divide activation bytes by N before placement: each device holds the
  // activations of its own data shard.
  bool data_parallel_act_split = true;
  long long prefetch_depth = 1;
};

MemoryReport derive_memory(const ModelProfile& model, const ClusterProfile& cluster,
                           const PlacementSpec& spec, const MemoryOptions& options = {});

enum class CommLabel {
  SyncAllReduce,      // grad = R: ring All-Reduce, 2*(N-1)/N*|G|
  SyncReduceScatter,  // grad = S: Reduce-Scatter, (N-1)/N*|G|
  ParamGather,        // theta = S*: All-Gather before forward and backward, 2*(N-1)/N*|Theta|
  ConsistencyRepair,  // theta = R, omega = S: post-update All-Gather, (N-1)/N*|Theta|
  OffloadTraffic,     // mode O: host load + store estimate, 2*|X|; outside collective total
  PpActivation,       // composed pipelines: boundary activations, (K-1)*boundary_bytes
};

std::string_view comm_label_name(CommLabel label);

struct CommTerm {
  CommLabel label;
  Rational bytes;        // per device per step, before amortization
  std::string formula;   // provenance string, e.g. "2*(N-1)/N*|G|"
  std::string dimension; // which parallel dimension produced the term ("", "DP", "PP")
  bool amortized = false;   // divided by accumulation_steps in the total
  bool in_total = true;     // offload traffic is reported but kept out of the total
};

struct CommReport {
  std::vector<CommTerm> terms;
  // Collective bytes per device per micro-batch step: once-per-update terms
  // (gradient sync, consistency repair) divided by accumulation_steps,
  // gather terms counted in full (they recur every micro-batch).
  Rational total_bytes_per_device_per_step;
  long long accumulation_steps = 1;
};

struct CommOptions {
  // Adds the parameter re-gather required after a sharded-optimizer update of
  // replicated parameters (ZeRO-1/2). Off by default: the derivation theorem
  // omits it, and default output reproduces the published figures.
  bool consistency_repair = false;
  long long accumulation_steps = 1;
};

CommReport derive_communication(const ModelProfile& model, const ClusterProfile& cluster,
                                const PlacementSpec& spec, const CommOptions& options = {});

struct TradeoffClaim {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct TradeoffRow {
  std::string strategy;
  MemoryReport memory;
  CommReport comm;
};

// DP vs ZeRO-1/2/3 memory/communication table, with the trade-off claims
// (sharding optimizer state is communication-free; reduce-scatter halves
// sync; gathered parameters add exactly 2*(N-1)/N*|Theta|) evaluated on the
// computed numbers. Claims involving strict inequalities need N >= 2.
struct TradeoffReport {
  std::vector<TradeoffRow> rows;
  std::vector<TradeoffClaim> claims;
  bool all_claims_hold() const;
};

TradeoffReport tradeoff_table(const ModelProfile& model, const ClusterProfile& cluster);

}  // namespace shardlab
