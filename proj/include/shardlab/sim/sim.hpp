// SPDX-License-Identifier: Apache-2.0
//
// Deterministic multi-device training simulation: executes a placement
// specification (DP, ZeRO-1/2/3), tensor-parallel or pipeline-parallel
// composition over simulated devices, meters every collective, and checks
// the runs against a single-device oracle:
//   1. gradient integrity     ||G_1 - G_N|| / ||G_1|| < 1e-5
//   2. state consistency      bitwise-identical replicas after collectives
//   3. trajectory equivalence |loss_1 - loss_N| < 1e-4 after the run
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shardlab/placement.hpp"
#include "shardlab/sim/data.hpp"
#include "shardlab/sim/model.hpp"
#include "shardlab/sim/optimizer.hpp"

namespace shardlab::sim {

inline constexpr double kGradRelTol = 1e-5;
inline constexpr double kLossDiffTol = 1e-4;

// Deliberate protocol violations, applied to device 0.
enum class FaultKind {
  None,
  MissingSample,       // drops its last sample's gradient contribution
  DuplicateSample,     // processes its first sample twice instead of its last
  WrongNormalization,  // skips the divide-by-N after gradient aggregation
  StaleParams,         // skips the post-update repair (or the update itself)
  PrecisionMismatch,   // truncates its gradient contribution to ~8 mantissa bits
  ReductionOrder,      // sums contributions in a device-local order instead of the ring order
};

std::string_view fault_name(FaultKind kind);
std::optional<FaultKind> parse_fault(std::string_view name);

struct SimPlan {
  enum class Kind { Placement, TensorData, PipelineData };
  Kind kind = Kind::Placement;
  PlacementSpec spec;  // Placement runs only
  long long tp = 1;    // TensorData: TP degree
  long long pp = 1;    // PipelineData: stage count
  long long dp = 1;    // data-parallel degree for TensorData / PipelineData
};

struct SimConfig {
  ModelShape shape{8, 16, 8, 4};
  long long global_batch = 32;
  long long device_count = 1;
  OptimizerParams optimizer{};
  long long steps = 100;
  std::uint64_t seed = 42;
  SimPlan plan;
  FaultKind inject = FaultKind::None;
  long long acct_element_size = 8;  // accounting bytes per element for the meters
};

struct Trajectory {
  std::vector<double> losses;               // pre-update global batch loss per step
  std::vector<double> first_step_gradient;  // flat global-mean gradient at step 1
  std::vector<double> final_params;         // flat parameters after the last step
};

// Per-device element counts, measured outside transient windows, plus the
// peak transiently gathered parameter elements (the executable counterpart of
// the memory rule's persistent / s_unit split).
struct StateElements {
  long long params = 0;
  long long optimizer = 0;
  long long grads = 0;
  long long peak_gathered_params = 0;
};

struct DistributedResult {
  Trajectory trajectory;
  bool checksum_consistent = true;
  std::vector<std::string> checksum_failures;
  // per collective label, per device: sent bytes over the whole run
  std::map<std::string, std::vector<unsigned long long>> sent_bytes;
  std::vector<StateElements> elements;
  long long steps_run = 0;
};

// Single-device reference trajectory.
Trajectory run_oracle(const SimConfig& cfg);

// Executes a DP/ZeRO placement specification. Modes M and O have no
// executable collective semantics and are refused (SpecUnsupported), as are
// placements outside the DP/ZeRO family.
DistributedResult run_distributed(const SimConfig& cfg);

// Tensor parallelism (degree tp) with data parallelism (degree dp) across
// groups; requires an even layer count and hidden_dim divisible by tp.
DistributedResult run_tensor_parallel(const SimConfig& cfg);

// Pipeline parallelism (pp stages, dp replicas); synchronous schedule,
// layer_count divisible by pp.
DistributedResult run_pipeline_parallel(const SimConfig& cfg);

struct CheckReport {
  double grad_rel_err = 0.0;
  bool grad_ok = false;
  bool checksum_consistent = false;
  double trajectory_loss_diff = 0.0;
  bool trajectory_ok = false;
  std::map<std::string, std::vector<unsigned long long>> measured_bytes;
  long long steps = 0;
  bool all_ok() const { return grad_ok && checksum_consistent && trajectory_ok; }
};

// Runs the oracle and the configured distributed execution with a shared
// seed and data order, then evaluates the three protocol checks.
CheckReport verify(const SimConfig& cfg);

}  // namespace shardlab::sim
