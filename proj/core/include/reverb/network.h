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

#ifndef REVERB_NETWORK_H_
#define REVERB_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reverb/binary_layer.h"
#include "reverb/neuron.h"

namespace reverb {

// vanilla: binary spikes, real weights everywhere.
// reverb: real-valued spikes, sign weights on hidden layers, alpha fixed at 1.
// reverb-learnable: as reverb, with a learned per-channel alpha.
enum class TrainMode { kVanilla, kReverb, kReverbLearnable };

std::string_view train_mode_name(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

// Layer stack. Every layer but the last feeds a LIF neuron; the last layer
// is the classifier and its current is the per-timestep output.
struct Network {
  Shape input_shape;  // per sample
  std::vector<BinaryLayer> layers;
  std::vector<NeuronParams> neurons;  // layers.size() - 1 entries
  std::size_t timesteps = 2;
  TrainMode mode = TrainMode::kReverb;
  WeightTransform transform = WeightTransform::kSign;
  // Bumped by every parameter update; forward caches remember it.
  std::uint64_t revision = 0;

  std::size_t num_classes() const { return layers.back().out_channels(); }
  // Per-sample output shape of every layer.
  std::vector<Shape> layer_output_shapes() const;
  // Throws DimensionError/ModeError when the structural invariants fail.
  void validate() const;
};

// Equal architecture, neuron parameters and weights (ignores revision).
bool same_parameters(const Network& a, const Network& b);

struct LayerPlan {
  LayerKind kind = LayerKind::kDense;
  std::size_t out = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
};

struct NetworkOptions {
  TrainMode mode = TrainMode::kReverb;
  double tau = 0.25;
  double v_th = 0.0;
  std::size_t timesteps = 2;
  std::uint64_t seed = 0;
  // Per-channel affine on real-valued layers that feed a neuron.
  bool affine = false;
};

// Builds a stack from `hidden` plans followed by a dense classifier with
// `classes` outputs. The first layer and the classifier stay real-valued.
Network build_network(const Shape& input_shape,
                      const std::vector<LayerPlan>& hidden,
                      std::size_t classes, const NetworkOptions& options);

// Named desk-scale architectures: "mlp-small" and "convnet-small".
Network build_architecture(std::string_view name, const Shape& input_shape,
                           std::size_t classes, const NetworkOptions& options);

}  // namespace reverb

#endif  // REVERB_NETWORK_H_
