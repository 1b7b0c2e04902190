// SPDX-License-Identifier: Apache-2.0
//
// Placement vocabulary: the five modes a training-state tensor can be placed
// with across devices, the four-state placement specification, and the
// catalog of named strategies (DP, ZeRO stages, TP, PP).
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "shardlab/error.hpp"

namespace shardlab {

enum class PlacementMode {
  Replicated,     // R:  every device stores the complete tensor
  Sharded,        // S:  device i stores contiguous shard i, used as-is
  ShardedGather,  // S*: sharded storage, full tensor gathered transiently before use
  Materialized,   // M:  nothing stored persistently; reconstructed on demand
  Offloaded,      // O:  resident in host memory, zero GPU footprint
};

inline constexpr std::array<PlacementMode, 5> kAllPlacementModes = {
    PlacementMode::Replicated,   PlacementMode::Sharded, PlacementMode::ShardedGather,
    PlacementMode::Materialized, PlacementMode::Offloaded,
};

std::string_view mode_token(PlacementMode mode);  // "R", "S", "S*", "M", "O"

// Parses one of the five tokens; anything else raises ConfigError{UnknownMode}.
// `field` names the offending config location in the error.
PlacementMode parse_mode(std::string_view token, const std::string& field = "placement");

// The four training states every configuration manages.
enum class StateKind { Theta, Omega, Grad, Act };

inline constexpr std::array<StateKind, 4> kAllStates = {
    StateKind::Theta, StateKind::Omega, StateKind::Grad, StateKind::Act};

std::string_view state_name(StateKind state);   // "theta", "omega", "grad", "act"
std::string_view state_symbol(StateKind state); // "params", "optimizer", "gradients", "activations"

// One placement mode per training state; fully determines a strategy.
struct PlacementSpec {
  PlacementMode theta = PlacementMode::Replicated;
  PlacementMode omega = PlacementMode::Replicated;
  PlacementMode grad = PlacementMode::Replicated;
  PlacementMode act = PlacementMode::Replicated;

  PlacementMode mode(StateKind state) const;
  void set_mode(StateKind state, PlacementMode mode);

  bool operator==(const PlacementSpec&) const = default;

  // States on which the two specs differ, in canonical state order.
  std::vector<StateKind> diff(const PlacementSpec& other) const;

  std::string str() const;  // "(R, S, S, R)"
};

// Non-fatal lint: combinations that are computable but that no cataloged
// strategy uses (e.g. gathered parameters with replicated optimizer state).
std::vector<std::string> spec_warnings(const PlacementSpec& spec);

struct CatalogEntry {
  std::string name;
  std::string description;
  PlacementSpec spec;
};

// The named strategies, in catalog order.
const std::vector<CatalogEntry>& strategy_catalog();

// Looks up a strategy by name ("ZeRO-3", "DP", ...; "FSDP" aliases ZeRO-3).
// Raises ConfigError{UnknownStrategy} otherwise.
PlacementSpec catalog_lookup(std::string_view name);

}  // namespace shardlab
