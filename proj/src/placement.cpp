// SPDX-License-Identifier: Apache-2.0
#include "shardlab/placement.hpp"

#include <algorithm>

namespace shardlab {

std::string_view mode_token(PlacementMode mode) {
  switch (mode) {
    case PlacementMode::Replicated: return "R";
    case PlacementMode::Sharded: return "S";
    case PlacementMode::ShardedGather: return "S*";
    case PlacementMode::Materialized: return "M";
    case PlacementMode::Offloaded: return "O";
  }
  return "?";
}

PlacementMode parse_mode(std::string_view token, const std::string& field) {
  for (PlacementMode mode : kAllPlacementModes) {
    if (token == mode_token(mode)) return mode;
  }
  throw ConfigError(ConfigError::Kind::UnknownMode, field,
                    "unknown placement mode \"" + std::string(token) +
                        "\" (expected one of R, S, S*, M, O)");
}

std::string_view state_name(StateKind state) {
  switch (state) {
    case StateKind::Theta: return "theta";
    case StateKind::Omega: return "omega";
    case StateKind::Grad: return "grad";
    case StateKind::Act: return "act";
  }
  return "?";
}

std::string_view state_symbol(StateKind state) {
  switch (state) {
    case StateKind::Theta: return "params";
    case StateKind::Omega: return "optimizer";
    case StateKind::Grad: return "gradients";
    case StateKind::Act: return "activations";
  }
  return "?";
}

PlacementMode PlacementSpec::mode(StateKind state) const {
  switch (state) {
    case StateKind::Theta: return theta;
    case StateKind::Omega: return omega;
    case StateKind::Grad: return grad;
    case StateKind::Act: return act;
  }
  return theta;
}

void PlacementSpec::set_mode(StateKind state, PlacementMode mode) {
  switch (state) {
    case StateKind::Theta: theta = mode; return;
    case StateKind::Omega: omega = mode; return;
    case StateKind::Grad: grad = mode; return;
    case StateKind::Act: act = mode; return;
  }
}

std::vector<StateKind> PlacementSpec::diff(const PlacementSpec& other) const {
  std::vector<StateKind> out;
  for (StateKind state : kAllStates) {
    if (mode(state) != other.mode(state)) out.push_back(state);
  }
  return out;
}

std::string PlacementSpec::str() const {
  std::string out = "(";
  for (StateKind state : kAllStates) {
    if (state != StateKind::Theta) out += ", ";
    out += mode_token(mode(state));
  }
  out += ")";
  return out;
}

std::vector<std::string> spec_warnings(const PlacementSpec& spec) {
  std::vector<std::string> out;
  if (spec.theta == PlacementMode::ShardedGather && spec.omega == PlacementMode::Replicated) {
    out.push_back(
        "theta=S* with omega=R matches no cataloged strategy; costs are still derivable");
  }
  return out;
}

const std::vector<CatalogEntry>& strategy_catalog() {
  using M = PlacementMode;
  static const std::vector<CatalogEntry> catalog = {
      {"DP", "Data Parallel", {M::Replicated, M::Replicated, M::Replicated, M::Replicated}},
      {"ZeRO-1", "ZeRO Stage 1 (optimizer state sharded)",
       {M::Replicated, M::Sharded, M::Replicated, M::Replicated}},
      {"ZeRO-2", "ZeRO Stage 2 (optimizer state + gradients sharded)",
       {M::Replicated, M::Sharded, M::Sharded, M::Replicated}},
      {"ZeRO-3", "ZeRO Stage 3 / FSDP (everything sharded, params gathered per use)",
       {M::ShardedGather, M::Sharded, M::Sharded, M::Replicated}},
      {"ZeRO-Offload", "ZeRO-Offload (params + optimizer state on host)",
       {M::Offloaded, M::Offloaded, M::Sharded, M::Replicated}},
      {"TP", "Tensor Parallel (intra-layer)",
       {M::Sharded, M::Sharded, M::Sharded, M::Sharded}},
      {"PP", "Pipeline Parallel (inter-layer)",
       {M::Sharded, M::Sharded, M::Sharded, M::Replicated}},
  };
  return catalog;
}

PlacementSpec catalog_lookup(std::string_view name) {
  std::string key(name);
  if (key == "FSDP") key = "ZeRO-3";
  for (const CatalogEntry& entry : strategy_catalog()) {
    if (entry.name == key) return entry.spec;
  }
  throw ConfigError(ConfigError::Kind::UnknownStrategy, "strategy",
                    "unknown strategy \"" + std::string(name) + "\"");
}

}  // namespace shardlab
