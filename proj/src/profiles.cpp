// SPDX-License-Identifier: Apache-2.0
#include "shardlab/profiles.hpp"

namespace shardlab {

ModelProfile ModelProfile::mixed_precision(long long param_count, std::optional<long long> layers,
                                           std::optional<long long> hidden) {
  ModelProfile profile;
  profile.param_count = param_count;
  profile.layers = layers;
  profile.hidden = hidden;
  profile.bytes_theta = kThetaBytesPerParam * param_count;
  profile.bytes_grad = kGradBytesPerParam * param_count;
  profile.bytes_omega = kOmegaBytesPerParam * param_count;
  if (hidden) {
    profile.s_unit = 12 * (*hidden) * (*hidden) * kThetaBytesPerParam;
  }
  return profile;
}

long long ModelProfile::layers_required(const std::string& reason) const {
  if (!layers) {
    throw ConfigError(ConfigError::Kind::MissingField, "model.layers",
                      "layer count required " + reason);
  }
  return *layers;
}

long long ModelProfile::hidden_required(const std::string& reason) const {
  if (!hidden) {
    throw ConfigError(ConfigError::Kind::MissingField, "model.hidden",
                      "hidden dimension required " + reason);
  }
  return *hidden;
}

long long ModelProfile::s_unit_required(const std::string& reason) const {
  if (s_unit <= 0) {
    throw ConfigError(ConfigError::Kind::MissingField, "model.s_unit",
                      "reconstruction unit required " + reason +
                          " (set model.s_unit or model.hidden for the default 12*H^2*2)");
  }
  return s_unit;
}

long long ModelProfile::estimate_params(long long layers, long long hidden) {
  return 12 * layers * hidden * hidden;
}

void ModelProfile::validate() const {
  if (param_count <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.params",
                      "parameter count must be > 0");
  }
  if (layers && *layers <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.layers", "layers must be > 0");
  }
  if (hidden && *hidden <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.hidden", "hidden must be > 0");
  }
  if (bytes_theta <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.bytes_theta",
                      "parameter bytes must be > 0");
  }
  if (bytes_omega <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.bytes_omega",
                      "optimizer-state bytes must be > 0");
  }
  if (bytes_grad <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.bytes_grad",
                      "gradient bytes must be > 0");
  }
  if (bytes_act < 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.bytes_act",
                      "activation bytes must be >= 0");
  }
  if (s_unit < 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.s_unit",
                      "reconstruction unit must be >= 0");
  }
  if (pp_boundary_bytes < 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "model.pp_boundary_bytes",
                      "boundary bytes must be >= 0");
  }
}

std::string_view tier_scope_name(TierScope scope) {
  return scope == TierScope::IntraNode ? "intra_node" : "inter_node";
}

std::string_view tier_class_name(TierClass cls) {
  return cls == TierClass::Fast ? "fast" : "slow";
}

bool ClusterProfile::has_fast_intra_node() const {
  for (const InterconnectTier& tier : interconnect) {
    if (tier.scope == TierScope::IntraNode && tier.cls == TierClass::Fast) return true;
  }
  return false;
}

const InterconnectTier* ClusterProfile::tier_for(TierScope scope) const {
  const InterconnectTier* best = nullptr;
  for (const InterconnectTier& tier : interconnect) {
    if (tier.scope == scope && (!best || tier.latency_s > best->latency_s)) best = &tier;
  }
  if (!best) {
    for (const InterconnectTier& tier : interconnect) {
      if (!best || tier.latency_s > best->latency_s) best = &tier;
    }
  }
  return best;
}

void ClusterProfile::validate() const {
  if (device_count < 1) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "cluster.devices",
                      "device count must be >= 1");
  }
  if (device_memory_bytes <= 0) {
    throw ConfigError(ConfigError::Kind::NonPositiveSize, "cluster.device_memory_bytes",
                      "device memory must be > 0");
  }
  if (interconnect.empty()) {
    throw ConfigError(ConfigError::Kind::MissingField, "cluster.interconnect",
                      "at least one interconnect tier required");
  }
  if (devices_per_node < 0 || (devices_per_node > 0 && device_count % devices_per_node != 0)) {
    throw ConfigError(ConfigError::Kind::BadValue, "cluster.devices_per_node",
                      "devices_per_node must divide devices");
  }
  for (const InterconnectTier& tier : interconnect) {
    if (tier.latency_s < 0) {
      throw ConfigError(ConfigError::Kind::BadValue, "cluster.interconnect.latency_s",
                        "latency must be >= 0");
    }
  }
}

}  // namespace shardlab
