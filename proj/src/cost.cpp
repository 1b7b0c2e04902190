// SPDX-License-Identifier: Apache-2.0
#include "shardlab/cost.hpp"

#include <sstream>

namespace shardlab {

namespace {

std::string fraction_str(long long device_count, bool doubled) {
  std::ostringstream os;
  if (doubled) os << "2*";
  os << "(N-1)/N";
  os << ", N=" << device_count;
  return os.str();
}

}  // namespace

MuResult mu(PlacementMode mode, Rational size, long long device_count, Rational s_unit,
            long long prefetch_depth) {
  switch (mode) {
    case PlacementMode::Replicated:
      return {size, 0};
    case PlacementMode::Sharded:
      return {size / device_count, 0};
    case PlacementMode::ShardedGather:
      return {size / device_count, s_unit * prefetch_depth};
    case PlacementMode::Materialized:
      return {0, s_unit};
    case PlacementMode::Offloaded:
      return {0, 0};
  }
  return {0, 0};
}

MemoryReport derive_memory(const ModelProfile& model, const ClusterProfile& cluster,
                           const PlacementSpec& spec, const MemoryOptions& options) {
  model.validate();
  cluster.validate();
  const long long n = cluster.device_count;

  // The reconstruction unit is only consulted for gather/materialize modes,
  // so plain R/S/O specs never require it.
  Rational s_unit = 0;
  for (StateKind state : kAllStates) {
    PlacementMode mode = spec.mode(state);
    if (mode == PlacementMode::ShardedGather || mode == PlacementMode::Materialized) {
      s_unit = model.s_unit_required("for sharded-with-gather or materialized placement");
      break;
    }
  }

  MemoryReport report;
  for (StateKind state : kAllStates) {
    Rational size = 0;
    switch (state) {
      case StateKind::Theta: size = model.bytes_theta; break;
      case StateKind::Omega: size = model.bytes_omega; break;
      case StateKind::Grad: size = model.bytes_grad; break;
      case StateKind::Act:
        size = model.bytes_act;
        if (options.data_parallel_act_split) size = size / n;
        break;
    }
    PlacementMode mode = spec.mode(state);
    MuResult m = mu(mode, size, n, s_unit, options.prefetch_depth);
    report.per_state[state] = {mode, m.persistent, m.transient};
    report.total_gpu_bytes += m.gpu_total();
    if (mode == PlacementMode::Offloaded) report.offloaded_bytes += size;
    if (state != StateKind::Act) {
      report.model_state_persistent_bytes += m.persistent;
      report.model_state_total_bytes += m.gpu_total();
    }
  }
  return report;
}

CommReport derive_communication(const ModelProfile& model, const ClusterProfile& cluster,
                                const PlacementSpec& spec, const CommOptions& options) {
  model.validate();
  cluster.validate();
  if (options.accumulation_steps < 1) {
    throw ConfigError(ConfigError::Kind::BadValue, "accumulation_steps", "must be >= 1");
  }
  const long long n = cluster.device_count;
  const Rational ring_fraction = Rational(n - 1, n);

  CommReport report;
  report.accumulation_steps = options.accumulation_steps;

  auto add = [&](CommLabel label, Rational bytes, std::string formula, bool amortized,
                 bool in_total) {
    report.terms.push_back({label, bytes, std::move(formula), "", amortized, in_total});
  };

  if (spec.grad == PlacementMode::Replicated) {
    add(CommLabel::SyncAllReduce, Rational(2) * ring_fraction * model.bytes_grad,
        "2*(N-1)/N*|G|, " + fraction_str(n, true), true, true);
  } else if (spec.grad == PlacementMode::Sharded) {
    add(CommLabel::SyncReduceScatter, ring_fraction * model.bytes_grad,
        "(N-1)/N*|G|, " + fraction_str(n, false), true, true);
  }

  if (spec.theta == PlacementMode::ShardedGather) {
    add(CommLabel::ParamGather, Rational(2) * ring_fraction * model.bytes_theta,
        "2*(N-1)/N*|Theta|, " + fraction_str(n, true), false, true);
  }

  if (options.consistency_repair && spec.omega == PlacementMode::Sharded &&
      spec.theta == PlacementMode::Replicated) {
    add(CommLabel::ConsistencyRepair, ring_fraction * model.bytes_theta,
        "(N-1)/N*|Theta|, " + fraction_str(n, false), true, true);
  }

  for (StateKind state : kAllStates) {
    if (spec.mode(state) != PlacementMode::Offloaded) continue;
    Rational size = 0;
    switch (state) {
      case StateKind::Theta: size = model.bytes_theta; break;
      case StateKind::Omega: size = model.bytes_omega; break;
      case StateKind::Grad: size = model.bytes_grad; break;
      case StateKind::Act: size = model.bytes_act; break;
    }
    // Host load + store estimate, deliberately outside the collective total.
    add(CommLabel::OffloadTraffic, Rational(2) * size,
        std::string("2*|") + std::string(state_name(state)) + "| host transfer estimate", false,
        false);
  }

  for (const CommTerm& term : report.terms) {
    if (!term.in_total) continue;
    report.total_bytes_per_device_per_step +=
        term.amortized ? term.bytes / options.accumulation_steps : term.bytes;
  }
  return report;
}

std::string_view comm_label_name(CommLabel label) {
  switch (label) {
    case CommLabel::SyncAllReduce: return "sync_allreduce";
    case CommLabel::SyncReduceScatter: return "sync_reducescatter";
    case CommLabel::ParamGather: return "param_gather";
    case CommLabel::ConsistencyRepair: return "consistency_repair";
    case CommLabel::OffloadTraffic: return "offload_traffic";
    case CommLabel::PpActivation: return "pp_activation_transfer";
  }
  return "?";
}

bool TradeoffReport::all_claims_hold() const {
  for (const TradeoffClaim& claim : claims) {
    if (!claim.holds) return false;
  }
  return true;
}

TradeoffReport tradeoff_table(const ModelProfile& model, const ClusterProfile& cluster) {
  static const char* kNames[] = {"DP", "ZeRO-1", "ZeRO-2", "ZeRO-3"};
  TradeoffReport report;
  for (const char* name : kNames) {
    PlacementSpec spec = catalog_lookup(name);
    report.rows.push_back(
        {name, derive_memory(model, cluster, spec), derive_communication(model, cluster, spec)});
  }

  auto mem = [&](int i) { return report.rows[i].memory.model_state_total_bytes; };
  auto comm = [&](int i) { return report.rows[i].comm.total_bytes_per_device_per_step; };
  const long long n = cluster.device_count;
  const Rational gather_delta = Rational(2) * Rational(n - 1, n) * model.bytes_theta;

  auto claim = [&](std::string name, bool holds, std::string detail) {
    report.claims.push_back({std::move(name), holds, std::move(detail)});
  };

  if (n >= 2) {
    claim("optimizer_sharding_free",
          mem(1) < mem(0) && comm(1) == comm(0),
          "mem(ZeRO-1) < mem(DP) with equal communication");
    claim("gradient_sharding_halves_sync", comm(2) == comm(1) / 2,
          "comm(ZeRO-2) = comm(ZeRO-1)/2");
    claim("param_gather_cost", comm(3) - comm(2) == gather_delta,
          "comm(ZeRO-3) - comm(ZeRO-2) = 2*(N-1)/N*|Theta|");
  } else {
    claim("degenerate_single_device", comm(0).is_zero() && comm(3).is_zero(),
          "all collective terms vanish at N=1");
  }
  return report;
}

}  // namespace shardlab
