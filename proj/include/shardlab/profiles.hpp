// SPDX-License-Identifier: Apache-2.0
//
// Model and cluster profiles: the sizes costs are derived from.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shardlab/error.hpp"

namespace shardlab {

// Mixed-precision byte accounting, 16 bytes per parameter in total:
// fp16 params (2) + fp16 gradients (2) + fp32 master weights and Adam
// moments grouped as optimizer state (12).
inline constexpr long long kThetaBytesPerParam = 2;
inline constexpr long long kGradBytesPerParam = 2;
inline constexpr long long kOmegaBytesPerParam = 12;

struct ModelProfile {
  long long param_count = 0;          // P
  std::optional<long long> layers;    // L, needed for pipeline splits and latency estimates
  std::optional<long long> hidden;    // H, needed for the default reconstruction unit

  long long bytes_theta = 0;  // parameter bytes
  long long bytes_omega = 0;  // optimizer-state bytes
  long long bytes_grad = 0;   // gradient bytes
  long long bytes_act = 0;    // activation bytes per full replica; 0 = not modeled

  // Smallest independently reconstructable unit for gather/materialize modes,
  // in bytes. 0 = unset; defaults to one fp16 transformer layer (12*H^2*2)
  // when hidden is known.
  long long s_unit = 0;

  // Activation bytes crossing one pipeline-stage boundary (optional input for
  // composed pipeline costs).
  long long pp_boundary_bytes = 0;

  // Builds a profile with the 16-bytes-per-parameter convention. Explicit
  // byte overrides win over the convention.
  static ModelProfile mixed_precision(long long param_count,
                                      std::optional<long long> layers = std::nullopt,
                                      std::optional<long long> hidden = std::nullopt);

  // Accessors that raise ConfigError{MissingField} when the optional input
  // was omitted but an operation needs it.
  long long layers_required(const std::string& reason) const;
  long long hidden_required(const std::string& reason) const;
  long long s_unit_required(const std::string& reason) const;

  // Advisory parameter-count estimate for a transformer: P ~ 12*L*H^2
  // (embeddings ignored). Never overrides an explicit param_count.
  static long long estimate_params(long long layers, long long hidden);

  void validate() const;  // throws ConfigError on violated invariants
};

enum class TierScope { IntraNode, InterNode };
enum class TierClass { Fast, Slow };

std::string_view tier_scope_name(TierScope scope);
std::string_view tier_class_name(TierClass cls);

struct InterconnectTier {
  TierScope scope = TierScope::IntraNode;
  double latency_s = 0.0;  // per-collective latency alpha
  TierClass cls = TierClass::Fast;
};

struct ClusterProfile {
  long long device_count = 1;         // N
  long long device_memory_bytes = 0;  // M_d
  std::vector<InterconnectTier> interconnect;
  // Devices per node; 0 means the whole cluster is one node.
  long long devices_per_node = 0;

  long long node_size() const {
    return devices_per_node > 0 ? devices_per_node : device_count;
  }

  bool has_fast_intra_node() const;

  // The tier a group communicating at `scope` would use: the highest-latency
  // tier with that scope, falling back to any tier if none matches.
  const InterconnectTier* tier_for(TierScope scope) const;

  void validate() const;
};

}  // namespace shardlab
