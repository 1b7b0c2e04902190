// SPDX-License-Identifier: Apache-2.0
//
// Single-device oracle and the DP/ZeRO-family executor.
#include <algorithm>
#include <cmath>

#include "engine.hpp"
#include "shardlab/sim/optimizer.hpp"
#include "shardlab/sim/sim.hpp"

namespace shardlab::sim {

using detail::Activations;

std::string_view fault_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::None: return "none";
    case FaultKind::MissingSample: return "missing-sample";
    case FaultKind::DuplicateSample: return "duplicate-sample";
    case FaultKind::WrongNormalization: return "wrong-normalization";
    case FaultKind::StaleParams: return "stale-params";
    case FaultKind::PrecisionMismatch: return "precision-mismatch";
    case FaultKind::ReductionOrder: return "reduction-order";
  }
  return "?";
}

std::optional<FaultKind> parse_fault(std::string_view name) {
  for (FaultKind kind :
       {FaultKind::None, FaultKind::MissingSample, FaultKind::DuplicateSample,
        FaultKind::WrongNormalization, FaultKind::StaleParams, FaultKind::PrecisionMismatch,
        FaultKind::ReductionOrder}) {
    if (name == fault_name(kind)) return kind;
  }
  return std::nullopt;
}

namespace {

std::vector<std::size_t> layer_offsets(const ModelShape& shape) {
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const LayerShape& l : shape.layers()) {
    offsets.push_back(off);
    off += static_cast<std::size_t>(l.param_count());
  }
  offsets.push_back(off);
  return offsets;
}

}  // namespace

Trajectory run_oracle(const SimConfig& cfg) {
  cfg.shape.validate();
  const std::vector<LayerShape> layers = cfg.shape.layers();
  const std::vector<std::size_t> offsets = layer_offsets(cfg.shape);
  TinyModel model = TinyModel::init(cfg.shape, cfg.seed);
  std::vector<double> params = model.flat();
  OptState opt = OptState::init(cfg.optimizer, params.size());
  DataGen data(cfg.seed, cfg.shape.input_dim, cfg.shape.output_dim);

  Trajectory traj;
  for (long long step = 1; step <= cfg.steps; ++step) {
    const Batch batch = data.global_batch(step, cfg.global_batch);
    Activations acts = detail::make_activations(cfg.shape, batch.size());
    acts[0] = batch.x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      detail::forward_layer(layers[l], params.data() + offsets[l], l + 1 == layers.size(),
                            acts[l], acts[l + 1]);
    }
    traj.losses.push_back(detail::batch_loss(acts.back(), batch));

    std::vector<double> grads(params.size(), 0.0);
    auto delta = detail::output_delta(acts.back(), batch);
    for (std::size_t l = layers.size(); l-- > 0;) {
      detail::backward_layer(layers[l], params.data() + offsets[l], l + 1 == layers.size(),
                             acts[l], acts[l + 1], delta, l > 0, grads.data() + offsets[l]);
    }
    for (double& g : grads) g /= static_cast<double>(batch.size());

    if (step == 1) traj.first_step_gradient = grads;
    apply_update(cfg.optimizer, step, params, grads, opt);
  }
  traj.final_params = params;
  return traj;
}

namespace {

struct DpDevice {
  std::vector<double> params_flat;                // theta R family
  std::vector<std::vector<double>> param_shards;  // theta S*: per layer
  OptState opt;
  std::vector<double> grads_flat;                 // grad R (full) or S (own flat shard)
  std::vector<std::vector<double>> grad_shards;   // theta S*: per layer shards
};

// Which DP-family pattern a placement spec describes.
struct DpPattern {
  bool params_gathered = false;  // theta = S*
  bool opt_sharded = false;      // omega = S
  bool grad_sharded = false;     // grad = S
  bool repair = false;           // sharded update of replicated params
};

DpPattern classify(const PlacementSpec& spec) {
  for (StateKind state : kAllStates) {
    const PlacementMode mode = spec.mode(state);
    if (mode == PlacementMode::Materialized || mode == PlacementMode::Offloaded) {
      throw SimError(SimError::Kind::SpecUnsupported,
                     "placement mode " + std::string(mode_token(mode)) + " for " +
                         std::string(state_name(state)) +
                         " is analytical-only: the simulator executes R, S and S* placements");
    }
  }
  if (spec.act != PlacementMode::Replicated) {
    throw SimError(SimError::Kind::SpecUnsupported,
                   "only replicated activations are executable; got act=" +
                       std::string(mode_token(spec.act)));
  }
  if (spec.theta == PlacementMode::Sharded || spec.omega == PlacementMode::ShardedGather ||
      spec.grad == PlacementMode::ShardedGather) {
    throw SimError(SimError::Kind::SpecUnsupported,
                   "placement " + spec.str() +
                       " is outside the executable DP/ZeRO family; use a composition for "
                       "tensor or pipeline parallelism");
  }
  DpPattern p;
  p.params_gathered = spec.theta == PlacementMode::ShardedGather;
  p.opt_sharded = spec.omega == PlacementMode::Sharded;
  p.grad_sharded = spec.grad == PlacementMode::Sharded;
  if (p.params_gathered && (!p.opt_sharded || !p.grad_sharded)) {
    throw SimError(SimError::Kind::SpecUnsupported,
                   "gathered parameters require sharded optimizer state and gradients (" +
                       spec.str() + ")");
  }
  if (p.grad_sharded && !p.opt_sharded) {
    throw SimError(SimError::Kind::SpecUnsupported,
                   "sharded gradients require sharded optimizer state (" + spec.str() + ")");
  }
  p.repair = p.opt_sharded && !p.params_gathered;
  return p;
}

}  // namespace

DistributedResult run_distributed(const SimConfig& cfg) {
  cfg.shape.validate();
  const DpPattern pattern = classify(cfg.plan.spec);
  const long long n = cfg.device_count;
  if (n < 1) throw SimError(SimError::Kind::SpecUnsupported, "device_count must be >= 1");
  if (cfg.global_batch % n != 0) {
    throw SimError(SimError::Kind::BatchNotDivisible,
                   "global batch " + std::to_string(cfg.global_batch) +
                       " not divisible by device count " + std::to_string(n));
  }
  const std::size_t un = static_cast<std::size_t>(n);
  const std::vector<LayerShape> layers = cfg.shape.layers();
  const std::vector<std::size_t> offsets = layer_offsets(cfg.shape);
  const std::size_t param_count = offsets.back();
  const FaultKind fault = cfg.inject;

  // Identical initialization on every device (consistent-start assumption).
  const TinyModel reference = TinyModel::init(cfg.shape, cfg.seed);
  const std::vector<double> init_flat = reference.flat();

  std::vector<DpDevice> devices(un);
  for (std::size_t i = 0; i < un; ++i) {
    DpDevice& dev = devices[i];
    if (pattern.params_gathered) {
      dev.param_shards.resize(layers.size());
      dev.grad_shards.resize(layers.size());
      std::size_t opt_elems = 0;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const ShardRange r =
            shard_range(static_cast<std::size_t>(layers[l].param_count()), un, i);
        dev.param_shards[l].assign(
            init_flat.begin() + static_cast<std::ptrdiff_t>(offsets[l] + r.begin),
            init_flat.begin() + static_cast<std::ptrdiff_t>(offsets[l] + r.end));
        opt_elems += r.size();
      }
      dev.opt = OptState::init(cfg.optimizer, opt_elems);
    } else {
      dev.params_flat = init_flat;
      const std::size_t owned =
          pattern.opt_sharded ? shard_range(param_count, un, i).size() : param_count;
      dev.opt = OptState::init(cfg.optimizer, owned);
    }
  }

  std::vector<int> ids(un);
  for (std::size_t i = 0; i < un; ++i) ids[i] = static_cast<int>(i);
  DeviceGroup world(ids);
  detail::LabeledMeters meters(un);
  detail::ConsistencyLog consistency;
  DataGen data(cfg.seed, cfg.shape.input_dim, cfg.shape.output_dim);

  // Gathers one layer's parameters from all devices; identical on every
  // device, so it is returned once.
  auto gather_layer = [&](std::size_t l) {
    std::vector<Buffer> shards(un);
    for (std::size_t i = 0; i < un; ++i) {
      shards[i] = Buffer(devices[i].param_shards[l], cfg.acct_element_size);
    }
    return meters.collect(world, "param_gather", [&] { return world.all_gather(shards); });
  };

  // Sum contributions across devices under the configured fault model.
  // Returns one vector per device (they differ only under ReductionOrder).
  auto faulty_all_reduce = [&](std::vector<std::vector<double>> contributions,
                               const std::string& label) {
    if (fault == FaultKind::PrecisionMismatch) detail::truncate_precision(contributions[0]);
    if (fault == FaultKind::ReductionOrder) {
      // Bypasses the ring: every device folds contributions in its own order.
      return detail::rotated_sums(contributions);
    }
    std::vector<Buffer> buffers(un);
    for (std::size_t i = 0; i < un; ++i) {
      buffers[i] = Buffer(std::move(contributions[i]), cfg.acct_element_size);
    }
    meters.collect(world, label, [&] { world.all_reduce(buffers); });
    std::vector<std::vector<double>> out(un);
    for (std::size_t i = 0; i < un; ++i) out[i] = std::move(buffers[i].elements);
    return out;
  };

  auto faulty_reduce_scatter = [&](std::vector<std::vector<double>> contributions,
                                   const std::string& label) {
    if (fault == FaultKind::PrecisionMismatch) detail::truncate_precision(contributions[0]);
    std::vector<Buffer> buffers(un);
    for (std::size_t i = 0; i < un; ++i) {
      buffers[i] = Buffer(std::move(contributions[i]), cfg.acct_element_size);
    }
    auto shards =
        meters.collect(world, label, [&] { return world.reduce_scatter(buffers); });
    std::vector<std::vector<double>> out(un);
    for (std::size_t i = 0; i < un; ++i) out[i] = std::move(shards[i].elements);
    return out;
  };

  DistributedResult result;
  long long peak_gathered = 0;

  for (long long step = 1; step <= cfg.steps; ++step) {
    Batch global = data.global_batch(step, cfg.global_batch);
    std::vector<Batch> local(un);
    for (std::size_t i = 0; i < un; ++i) local[i] = DataGen::slice(global, n, static_cast<long long>(i));
    if (fault == FaultKind::DuplicateSample && !local[0].x.empty()) {
      local[0].x.back() = local[0].x.front();
      local[0].y.back() = local[0].y.front();
    }
    const double local_b = static_cast<double>(local[0].size());

    // Forward.
    std::vector<Activations> acts(un);
    for (std::size_t i = 0; i < un; ++i) {
      acts[i] = detail::make_activations(cfg.shape, local[i].size());
      acts[i][0] = local[i].x;
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const double* layer_params = nullptr;
      Buffer gathered;
      if (pattern.params_gathered) {
        gathered = gather_layer(l);
        peak_gathered = std::max(peak_gathered, static_cast<long long>(gathered.size()));
        layer_params = gathered.elements.data();
      }
      for (std::size_t i = 0; i < un; ++i) {
        const double* p =
            pattern.params_gathered ? layer_params : devices[i].params_flat.data() + offsets[l];
        detail::forward_layer(layers[l], p, l + 1 == layers.size(), acts[i][l], acts[i][l + 1]);
      }
    }

    double loss = 0.0;
    for (std::size_t i = 0; i < un; ++i) loss += detail::batch_loss(acts[i].back(), local[i]);
    result.trajectory.losses.push_back(loss / static_cast<double>(n));

    // Backward.
    std::vector<std::vector<std::vector<double>>> delta(un);
    for (std::size_t i = 0; i < un; ++i) {
      delta[i] = detail::output_delta(acts[i].back(), local[i]);
    }
    if (fault == FaultKind::MissingSample && !delta[0].empty()) {
      // Device 0 never folds its last sample into the gradient.
      std::fill(delta[0].back().begin(), delta[0].back().end(), 0.0);
    }

    std::vector<std::vector<double>> flat_grads;  // non-gathered family
    if (!pattern.params_gathered) {
      flat_grads.assign(un, std::vector<double>(param_count, 0.0));
    }

    for (std::size_t l = layers.size(); l-- > 0;) {
      const double* layer_params = nullptr;
      Buffer gathered;
      std::vector<std::vector<double>> layer_grads;
      if (pattern.params_gathered) {
        gathered = gather_layer(l);
        layer_params = gathered.elements.data();
        layer_grads.assign(un,
                           std::vector<double>(static_cast<std::size_t>(layers[l].param_count()), 0.0));
      }
      for (std::size_t i = 0; i < un; ++i) {
        const double* p =
            pattern.params_gathered ? layer_params : devices[i].params_flat.data() + offsets[l];
        double* grad_out = pattern.params_gathered ? layer_grads[i].data()
                                                   : flat_grads[i].data() + offsets[l];
        detail::backward_layer(layers[l], p, l + 1 == layers.size(), acts[i][l], acts[i][l + 1],
                               delta[i], l > 0, grad_out);
      }
      if (pattern.params_gathered) {
        // Local mean, then reduce-scatter and divide by N: each device keeps
        // the global-mean shard of this layer's gradient.
        for (std::size_t i = 0; i < un; ++i) {
          for (double& g : layer_grads[i]) g /= local_b;
        }
        auto shards = faulty_reduce_scatter(std::move(layer_grads), "sync_reducescatter");
        if (fault != FaultKind::WrongNormalization) {
          for (auto& shard : shards) {
            for (double& g : shard) g /= static_cast<double>(n);
          }
        }
        for (std::size_t i = 0; i < un; ++i) devices[i].grad_shards[l] = std::move(shards[i]);
      }
    }

    if (!pattern.params_gathered) {
      for (std::size_t i = 0; i < un; ++i) {
        for (double& g : flat_grads[i]) g /= local_b;
      }
      if (pattern.grad_sharded) {
        auto shards = faulty_reduce_scatter(std::move(flat_grads), "sync_reducescatter");
        if (fault != FaultKind::WrongNormalization) {
          for (auto& shard : shards) {
            for (double& g : shard) g /= static_cast<double>(n);
          }
        }
        for (std::size_t i = 0; i < un; ++i) devices[i].grads_flat = std::move(shards[i]);
      } else {
        auto summed = faulty_all_reduce(std::move(flat_grads), "sync_allreduce");
        if (fault != FaultKind::WrongNormalization) {
          for (auto& full : summed) {
            for (double& g : full) g /= static_cast<double>(n);
          }
        }
        // All replicas must now hold the identical synchronized gradient.
        std::vector<std::uint64_t> sums(un);
        for (std::size_t i = 0; i < un; ++i) sums[i] = checksum(summed[i]);
        consistency.require_identical(sums, "gradient after all-reduce (step " +
                                                std::to_string(step) + ")");
        for (std::size_t i = 0; i < un; ++i) devices[i].grads_flat = std::move(summed[i]);
      }
    }

    // Record the global-mean gradient a device would apply at step 1.
    if (step == 1) {
      std::vector<double>& g1 = result.trajectory.first_step_gradient;
      g1.assign(param_count, 0.0);
      if (pattern.params_gathered) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
          const std::size_t count = static_cast<std::size_t>(layers[l].param_count());
          for (std::size_t i = 0; i < un; ++i) {
            const ShardRange r = shard_range(count, un, i);
            std::copy(devices[i].grad_shards[l].begin(), devices[i].grad_shards[l].end(),
                      g1.begin() + static_cast<std::ptrdiff_t>(offsets[l] + r.begin));
          }
        }
      } else if (pattern.grad_sharded) {
        for (std::size_t i = 0; i < un; ++i) {
          const ShardRange r = shard_range(param_count, un, i);
          std::copy(devices[i].grads_flat.begin(), devices[i].grads_flat.end(),
                    g1.begin() + static_cast<std::ptrdiff_t>(r.begin));
        }
      } else {
        g1 = devices[0].grads_flat;
      }
    }

    // Update.
    if (pattern.params_gathered) {
      std::size_t opt_off = 0;
      for (std::size_t i = 0; i < un; ++i) {
        opt_off = 0;
        DpDevice& dev = devices[i];
        for (std::size_t l = 0; l < layers.size(); ++l) {
          std::vector<double>& shard = dev.param_shards[l];
          const bool skip = fault == FaultKind::StaleParams && i == 0;
          if (!skip) {
            std::span<double> pspan(shard.data(), shard.size());
            std::span<const double> gspan(dev.grad_shards[l].data(), dev.grad_shards[l].size());
            OptState slice;  // view into the device state
            if (cfg.optimizer.kind == OptimizerKind::Adam) {
              slice.m.assign(dev.opt.m.begin() + static_cast<std::ptrdiff_t>(opt_off),
                             dev.opt.m.begin() + static_cast<std::ptrdiff_t>(opt_off + shard.size()));
              slice.v.assign(dev.opt.v.begin() + static_cast<std::ptrdiff_t>(opt_off),
                             dev.opt.v.begin() + static_cast<std::ptrdiff_t>(opt_off + shard.size()));
            }
            apply_update(cfg.optimizer, step, pspan, gspan, slice);
            if (cfg.optimizer.kind == OptimizerKind::Adam) {
              std::copy(slice.m.begin(), slice.m.end(),
                        dev.opt.m.begin() + static_cast<std::ptrdiff_t>(opt_off));
              std::copy(slice.v.begin(), slice.v.end(),
                        dev.opt.v.begin() + static_cast<std::ptrdiff_t>(opt_off));
            }
          }
          opt_off += shard.size();
        }
      }
    } else {
      for (std::size_t i = 0; i < un; ++i) {
        DpDevice& dev = devices[i];
        const ShardRange own =
            pattern.opt_sharded ? shard_range(param_count, un, i) : ShardRange{0, param_count};
        const bool skip_update = fault == FaultKind::StaleParams && i == 0 && !pattern.repair;
        if (!skip_update) {
          std::span<double> pspan(dev.params_flat.data() + own.begin, own.size());
          const double* gsrc = pattern.grad_sharded ? dev.grads_flat.data()
                                                    : dev.grads_flat.data() + own.begin;
          std::span<const double> gspan(gsrc, own.size());
          apply_update(cfg.optimizer, step, pspan, gspan, dev.opt);
        }
      }
      if (pattern.repair) {
        // Sharded update of replicated parameters: re-gather so every replica
        // sees the new values (state-consistency requirement).
        std::vector<Buffer> shards(un);
        for (std::size_t i = 0; i < un; ++i) {
          const ShardRange own = shard_range(param_count, un, i);
          shards[i] = Buffer(std::vector<double>(devices[i].params_flat.begin() +
                                                     static_cast<std::ptrdiff_t>(own.begin),
                                                 devices[i].params_flat.begin() +
                                                     static_cast<std::ptrdiff_t>(own.end)),
                             cfg.acct_element_size);
        }
        Buffer full =
            meters.collect(world, "consistency_repair", [&] { return world.all_gather(shards); });
        for (std::size_t i = 0; i < un; ++i) {
          if (fault == FaultKind::StaleParams && i == 0) continue;  // keeps stale non-own ranges
          devices[i].params_flat = full.elements;
        }
        if (fault == FaultKind::StaleParams) {
          // Device 0 still refreshed its own shard locally.
          const ShardRange own = shard_range(param_count, un, 0);
          std::copy(full.elements.begin() + static_cast<std::ptrdiff_t>(own.begin),
                    full.elements.begin() + static_cast<std::ptrdiff_t>(own.end),
                    devices[0].params_flat.begin() + static_cast<std::ptrdiff_t>(own.begin));
        }
      }
      // Replicated parameters must agree bitwise after the update.
      std::vector<std::uint64_t> sums(un);
      for (std::size_t i = 0; i < un; ++i) sums[i] = checksum(devices[i].params_flat);
      consistency.require_identical(sums,
                                    "parameters after update (step " + std::to_string(step) + ")");
    }
  }

  // Assemble the final parameter vector from device 0's view.
  if (pattern.params_gathered) {
    result.trajectory.final_params.assign(param_count, 0.0);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::size_t count = static_cast<std::size_t>(layers[l].param_count());
      for (std::size_t i = 0; i < un; ++i) {
        const ShardRange r = shard_range(count, un, i);
        std::copy(devices[i].param_shards[l].begin(), devices[i].param_shards[l].end(),
                  result.trajectory.final_params.begin() +
                      static_cast<std::ptrdiff_t>(offsets[l] + r.begin));
      }
    }
  } else {
    result.trajectory.final_params = devices[0].params_flat;
  }

  result.checksum_consistent = consistency.ok;
  result.checksum_failures = consistency.failures;
  result.sent_bytes = meters.per_label();
  result.steps_run = cfg.steps;
  result.elements.resize(un);
  for (std::size_t i = 0; i < un; ++i) {
    StateElements& e = result.elements[i];
    if (pattern.params_gathered) {
      for (std::size_t l = 0; l < layers.size(); ++l) {
        e.params += static_cast<long long>(devices[i].param_shards[l].size());
        e.grads += static_cast<long long>(devices[i].grad_shards[l].size());
      }
      e.peak_gathered_params = peak_gathered;
    } else {
      e.params = static_cast<long long>(devices[i].params_flat.size());
      e.grads = static_cast<long long>(devices[i].grads_flat.size());
    }
    e.optimizer = static_cast<long long>(devices[i].opt.element_count());
  }
  return result;
}

}  // namespace shardlab::sim
