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

#include "reverb/network.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace reverb {

std::string_view train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::kVanilla:
      return "vanilla";
    case TrainMode::kReverb:
      return "reverb";
    case TrainMode::kReverbLearnable:
      return "reverb-learnable";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "vanilla") return TrainMode::kVanilla;
  if (name == "reverb") return TrainMode::kReverb;
  if (name == "reverb-learnable") return TrainMode::kReverbLearnable;
  throw ModeError("unknown mode '" + std::string(name) +
                  "' (expected vanilla, reverb or reverb-learnable)");
}

std::vector<Shape> Network::layer_output_shapes() const {
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  Shape current = input_shape;
  for (const BinaryLayer& layer : layers) {
    current = layer.output_shape(current);
    shapes.push_back(current);
  }
  return shapes;
}

void Network::validate() const {
  if (layers.size() < 2) {
    throw DimensionError("a network needs at least an encoder and a classifier");
  }
  if (neurons.size() != layers.size() - 1) {
    throw DimensionError("expected " + std::to_string(layers.size() - 1) +
                         " neuron parameter sets, got " +
                         std::to_string(neurons.size()));
  }
  if (timesteps == 0) throw DimensionError("timesteps must be positive");
  if (layers.back().kind != LayerKind::kDense) {
    throw DimensionError("the classifier must be a dense layer");
  }
  const std::vector<Shape> shapes = layer_output_shapes();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const BinaryLayer& layer = layers[l];
    const bool edge = l == 0 || l + 1 == layers.size();
    if (mode == TrainMode::kVanilla ? layer.binarize : layer.binarize == edge) {
      throw ModeError("layer " + std::to_string(l) +
                      (layer.binarize ? " must not" : " must") +
                      " be binarized in mode " +
                      std::string(train_mode_name(mode)));
    }
    if (layer.alpha.size() != layer.out_channels()) {
      throw DimensionError("layer " + std::to_string(l) +
                           ": alpha length does not match output channels");
    }
    for (double a : layer.alpha) {
      if (!(a > 0.0)) {
        throw ModeError("layer " + std::to_string(l) + ": alpha must be positive");
      }
    }
    if (layer.binarize) {
      for (double w : layer.w_latent.data()) {
        if (w < -1.0 || w > 1.0) {
          throw ModeError("layer " + std::to_string(l) +
                          ": latent weight outside [-1, 1]");
        }
      }
    }
    if (layer.affine && (layer.binarize ||
                         layer.affine->gamma.size() != layer.out_channels() ||
                         layer.affine->beta.size() != layer.out_channels())) {
      throw DimensionError("layer " + std::to_string(l) + ": bad affine");
    }
    if (l + 1 < layers.size()) {
      neurons[l].validate();
      const NeuronParams& p = neurons[l];
      const std::size_t channels = channel_count(Shape{1, shapes[l][0]});
      if (p.mode == FireMode::kScaledReal && p.scale.size() != channels) {
        throw DimensionError("layer " + std::to_string(l) +
                             ": firing scale length does not match channels");
      }
      if (!p.channel_v_th.empty() && p.channel_v_th.size() != channels) {
        throw DimensionError("layer " + std::to_string(l) +
                             ": per-channel threshold length mismatch");
      }
    }
  }
}

bool same_parameters(const Network& a, const Network& b) {
  return a.input_shape == b.input_shape && a.layers == b.layers &&
         a.neurons == b.neurons && a.timesteps == b.timesteps &&
         a.mode == b.mode && a.transform == b.transform;
}

Network build_network(const Shape& input_shape,
                      const std::vector<LayerPlan>& hidden,
                      std::size_t classes, const NetworkOptions& options) {
  if (hidden.empty()) {
    throw DimensionError("build_network needs at least one hidden layer");
  }
  std::mt19937_64 rng(options.seed);
  Network net;
  net.input_shape = input_shape;
  net.timesteps = options.timesteps;
  net.mode = options.mode;

  std::vector<LayerPlan> plans = hidden;
  plans.push_back(LayerPlan{LayerKind::kDense, classes, 1, 1, 0});

  Shape current = input_shape;
  for (std::size_t l = 0; l < plans.size(); ++l) {
    const LayerPlan& plan = plans[l];
    const bool last = l + 1 == plans.size();
    BinaryLayer layer;
    layer.kind = plan.kind;
    std::size_t fan_in = 0;
    if (plan.kind == LayerKind::kDense) {
      fan_in = shape_size(current);
      layer.w_latent = Tensor({plan.out, fan_in});
    } else {
      if (current.size() != 3) {
        throw DimensionError("conv layer needs a [C, H, W] input, got " +
                             shape_string(current));
      }
      fan_in = current[0] * plan.kernel * plan.kernel;
      layer.w_latent = Tensor({plan.out, current[0], plan.kernel, plan.kernel});
      layer.stride = plan.stride;
      layer.padding = plan.padding;
    }
    layer.binarize = options.mode != TrainMode::kVanilla && l != 0 && !last;
    layer.learn_alpha =
        layer.binarize && options.mode == TrainMode::kReverbLearnable;

    const double bound = std::min(1.0, std::sqrt(6.0 / static_cast<double>(fan_in)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : layer.w_latent.data()) w = dist(rng);

    // alpha_c = mean |w| over the channel when learned, 1 otherwise.
    layer.alpha.assign(plan.out, 1.0);
    if (layer.learn_alpha) {
      const std::size_t per = layer.w_latent.size() / plan.out;
      for (std::size_t c = 0; c < plan.out; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < per; ++j) {
          s += std::abs(layer.w_latent[c * per + j]);
        }
        layer.alpha[c] = std::max(kAlphaFloor, s / static_cast<double>(per));
      }
    }
    if (options.affine && !layer.binarize && !last) {
      layer.affine = Affine{std::vector<double>(plan.out, 1.0),
                            std::vector<double>(plan.out, 0.0)};
    }
    current = layer.output_shape(current);
    net.layers.push_back(std::move(layer));
    if (!last) {
      NeuronParams p;
      p.tau = options.tau;
      p.v_th = options.v_th;
      p.mode = options.mode == TrainMode::kVanilla ? FireMode::kBinary
                                                   : FireMode::kReal;
      net.neurons.push_back(p);
    }
  }
  net.validate();
  return net;
}

Network build_architecture(std::string_view name, const Shape& input_shape,
                           std::size_t classes, const NetworkOptions& options) {
  if (name == "mlp-small") {
    return build_network(input_shape,
                         {LayerPlan{LayerKind::kDense, 128},
                          LayerPlan{LayerKind::kDense, 128}},
                         classes, options);
  }
  if (name == "convnet-small") {
    Shape image = input_shape;
    if (image.size() != 3) {
      throw DimensionError("convnet-small needs [C, H, W] samples, got " +
                           shape_string(input_shape));
    }
    return build_network(image,
                         {LayerPlan{LayerKind::kConv, 8, 3, 1, 1},
                          LayerPlan{LayerKind::kConv, 16, 3, 2, 1},
                          LayerPlan{LayerKind::kDense, 64}},
                         classes, options);
  }
  throw ModeError("unknown architecture '" + std::string(name) +
                  "' (expected mlp-small or convnet-small)");
}

}  // namespace reverb
