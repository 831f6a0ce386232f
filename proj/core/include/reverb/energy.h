// Copyright 2026 The ReverB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Operation counts and energy. Real-valued layers (the encoder and the
// classifier) are charged one FLOP per multiply-accumulate per timestep.
// Hidden layers run on the addition-only path and are charged
// SOPs = s * T * A, with A the addition count of the equivalent ANN layer and
// s the measured spike sparsity.

#ifndef REVERB_ENERGY_H_
#define REVERB_ENERGY_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reverb/network.h"

namespace reverb {

inline constexpr double kJoulesPerFlop = 12.5e-12;
inline constexpr double kJoulesPerSop = 77e-15;

// Per spiking layer (every layer but the classifier) spike statistics over
// one or more inference passes.
struct SpikeRecords {
  std::vector<std::uint64_t> nonzero;        // nonzero spike emissions
  std::vector<std::uint64_t> opportunities;  // neurons x timesteps x samples
  std::size_t timesteps = 0;
  std::size_t samples = 0;

  bool empty() const { return samples == 0; }
  void merge(const SpikeRecords& other);
};

enum class SparsityWeighting { kAdditionWeighted, kPlain };

struct SparsityReport {
  std::vector<double> per_layer;  // one per spiking layer
  double mean = 0.0;
};

// True for layers on the addition-only path (hidden layers after the
// encoder and before the classifier).
bool on_addition_path(const Network& net, std::size_t layer);

// Additions of the equivalent ANN layer: out * in for dense layers,
// C_out * H' * W' * C_in * k^2 for conv layers.
std::uint64_t layer_additions(const BinaryLayer& layer, const Shape& input_shape);
std::uint64_t total_additions(const Network& net);

// The mean pairs every addition-path layer with the sparsity of the spikes
// it consumes; kAdditionWeighted weights those by the layer's A.
SparsityReport measure_sparsity(const Network& net, const SpikeRecords& records,
                                SparsityWeighting weighting =
                                    SparsityWeighting::kAdditionWeighted);

// Multiply-accumulates of the real-valued layers for one sample, times T.
double count_flops(const Network& net, std::size_t timesteps);
// s * T * A.
double count_sops(const Network& net, double sparsity, std::size_t timesteps);

struct EnergyReport {
  double flops = 0.0;
  double sops = 0.0;
  std::vector<double> layer_sparsity;
  double sparsity = 0.0;
  std::size_t timesteps = 0;
  double energy_joules = 0.0;
};

// energy = flops * 12.5 pJ + sops * 77 fJ. Throws DimensionError on
// negative counts.
EnergyReport estimate_energy(double flops, double sops);

// Full per-sample report for a network from recorded spikes.
EnergyReport energy_report(const Network& net, const SpikeRecords& records,
                           SparsityWeighting weighting =
                               SparsityWeighting::kAdditionWeighted);

}  // namespace reverb

#endif  // REVERB_ENERGY_H_
