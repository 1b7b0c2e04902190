// SPDX-License-Identifier: Apache-2.0
//
// Internal helpers shared by the simulator executors. Not installed.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shardlab/collectives.hpp"
#include "shardlab/sim/data.hpp"
#include "shardlab/sim/model.hpp"
#include "shardlab/sim/sim.hpp"

namespace shardlab::sim::detail {

// acts[l][sample] = input to layer l; acts[L][sample] = network output.
using Activations = std::vector<std::vector<std::vector<double>>>;

Activations make_activations(const ModelShape& shape, std::size_t batch);

// Forward of one full layer for every sample: z = W*a + b, then tanh unless
// it is the output layer.
void forward_layer(const LayerShape& shape, const double* params, bool is_last,
                   const std::vector<std::vector<double>>& inputs,
                   std::vector<std::vector<double>>& outputs);

// Mean of 0.5*||out - y||^2 over the batch.
double batch_loss(const std::vector<std::vector<double>>& outputs, const Batch& batch);

// Initial backward delta: d(loss_sum)/d(output) = out - y per sample.
std::vector<std::vector<double>> output_delta(const std::vector<std::vector<double>>& outputs,
                                              const Batch& batch);

// Backward of one full layer for every sample. `delta` enters as
// d(loss_sum)/d(layer output) and leaves as d(loss_sum)/d(layer input)
// (only when need_input_grad). Gradients are accumulated unscaled into
// `grad` (layout: W then bias).
void backward_layer(const LayerShape& shape, const double* params, bool is_last,
                    const std::vector<std::vector<double>>& inputs,
                    const std::vector<std::vector<double>>& outputs,
                    std::vector<std::vector<double>>& delta, bool need_input_grad, double* grad);

// Rounds every value to roughly 8 significand bits, emulating a device that
// contributes a low-precision tensor to a reduction.
void truncate_precision(std::vector<double>& values);

// Naive per-device reduction in a device-rotated order: device i sums
// contributions i, i+1, ..., i-1. Used by the reduction-order fault;
// results generally differ bitwise across devices.
std::vector<std::vector<double>> rotated_sums(const std::vector<std::vector<double>>& contributions);

// Attributes collective traffic to labels by snapshotting group meters.
class LabeledMeters {
 public:
  explicit LabeledMeters(std::size_t devices) : devices_(devices) {}

  template <class Fn>
  auto collect(DeviceGroup& group, const std::string& label, Fn&& fn) {
    std::vector<unsigned long long> before(devices_);
    for (std::size_t i = 0; i < devices_; ++i) before[i] = group.meter(i).sent_bytes;
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      absorb(group, label, before);
    } else {
      auto result = fn();
      absorb(group, label, before);
      return result;
    }
  }

  const std::map<std::string, std::vector<unsigned long long>>& per_label() const {
    return sent_;
  }

 private:
  void absorb(DeviceGroup& group, const std::string& label,
              const std::vector<unsigned long long>& before) {
    auto& row = sent_[label];
    row.resize(devices_, 0);
    for (std::size_t i = 0; i < devices_; ++i) {
      row[i] += group.meter(i).sent_bytes - before[i];
    }
  }

  std::size_t devices_;
  std::map<std::string, std::vector<unsigned long long>> sent_;
};

// Consistency bookkeeping for protocol step 2.
struct ConsistencyLog {
  bool ok = true;
  std::vector<std::string> failures;

  void require_identical(const std::vector<std::uint64_t>& checksums, const std::string& what) {
    for (std::size_t i = 1; i < checksums.size(); ++i) {
      if (checksums[i] != checksums[0]) {
        ok = false;
        if (failures.size() < 8) {
          failures.push_back(what + ": device " + std::to_string(i) +
                             " diverges from device 0");
        }
        return;
      }
    }
  }
};

}  // namespace shardlab::sim::detail
