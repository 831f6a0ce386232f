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

#include "reverb/reparam.h"

#include <algorithm>
#include <limits>
#include <string>

#include "reverb/trainer.h"

namespace reverb {

void InferenceNetwork::validate() const {
  net.validate();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const BinaryLayer& layer = net.layers[l];
    if (!layer.binarize) continue;
    for (double a : layer.alpha) {
      if (a != 1.0) {
        throw ModeError("layer " + std::to_string(l) + " still carries alpha");
      }
    }
    for (double w : layer.w_latent.data()) {
      if (w != 1.0 && w != -1.0) {
        throw ModeError("layer " + std::to_string(l) +
                        " has a weight outside {-1, +1}");
      }
    }
  }
}

namespace {

std::string pair_name(std::size_t i) {
  return "layers " + std::to_string(i - 1) + " -> " + std::to_string(i);
}

// Makes sure `p` can carry a per-channel output scale.
void promote_to_scaled(NeuronParams& p, std::size_t channels,
                       std::size_t layer_index) {
  if (p.mode == FireMode::kBinary) {
    throw FoldError("cannot fold alpha into layer " +
                    std::to_string(layer_index) +
                    ": binary-spike neurons carry no output scale");
  }
  if (p.mode == FireMode::kReal) {
    p.mode = FireMode::kScaledReal;
    p.scale.assign(channels, 1.0);
  }
  if (p.scale.size() != channels) {
    throw FoldError("firing scale of layer " + std::to_string(layer_index) +
                    " does not match its channel count");
  }
}

}  // namespace

InferenceNetwork fold_alpha(const Network& net) {
  net.validate();
  if (net.transform != WeightTransform::kSign) {
    throw ModeError("fold_alpha expects the sign weight transform");
  }
  InferenceNetwork out{net};
  Network& folded = out.net;
  const std::vector<Shape> shapes = net.layer_output_shapes();

  for (std::size_t i = 0; i < folded.layers.size(); ++i) {
    BinaryLayer& layer = folded.layers[i];
    if (!layer.binarize) continue;
    if (i == 0 || i + 1 == folded.layers.size()) {
      throw FoldError("binarized layer " + std::to_string(i) +
                      " has no neighbouring firing function");
    }
    const std::size_t channels = layer.out_channels();
    if (layer.alpha.size() != channels) {
      throw FoldError(pair_name(i) + ": alpha has " +
                      std::to_string(layer.alpha.size()) + " entries for " +
                      std::to_string(channels) + " channels");
    }
    const std::vector<double> alpha = layer.alpha;
    const bool unit = std::all_of(alpha.begin(), alpha.end(),
                                  [](double a) { return a == 1.0; });
    const bool uniform = std::all_of(alpha.begin(), alpha.end(),
                                     [&](double a) { return a == alpha[0]; });
    if (!unit) {
      if (uniform) {
        NeuronParams& prev = folded.neurons[i - 1];
        const std::size_t prev_channels = shapes[i - 1][0];
        try {
          promote_to_scaled(prev, prev_channels, i - 1);
        } catch (const FoldError& e) {
          throw FoldError(pair_name(i) + ": " + e.what());
        }
        for (double& s : prev.scale) s *= alpha[0];
      } else {
        NeuronParams& own = folded.neurons[i];
        try {
          promote_to_scaled(own, channels, i);
        } catch (const FoldError& e) {
          throw FoldError(pair_name(i) + ": " + e.what());
        }
        if (own.channel_v_th.empty()) own.channel_v_th.assign(channels, own.v_th);
        for (std::size_t c = 0; c < channels; ++c) {
          own.scale[c] *= alpha[c];
          own.channel_v_th[c] /= alpha[c];
        }
      }
    }
    layer.alpha.assign(channels, 1.0);
    layer.learn_alpha = false;
    layer.w_latent = binarize_weights(layer.w_latent);
  }
  out.validate();
  return out;
}

EquivalenceReport verify_equivalence(const Network& net,
                                     const InferenceNetwork& inference,
                                     const Tensor& probes,
                                     std::size_t timesteps) {
  const Tensor reference =
      aggregate_output(forward_pass(net, probes, timesteps).outputs);
  const Tensor folded =
      aggregate_output(forward_pass(inference.net, probes, timesteps).outputs);
  if (reference.shape() != folded.shape()) {
    throw DimensionError("verify_equivalence: output shapes differ");
  }
  EquivalenceReport report;
  report.max_abs_diff = max_abs_diff(reference, folded);
  report.max_abs_output = max_abs(reference);
  report.max_rel_diff =
      report.max_abs_diff == 0.0
          ? 0.0
          : report.max_abs_diff /
                std::max(report.max_abs_output,
                         std::numeric_limits<double>::min());
  report.bitwise_equal = bitwise_equal(reference, folded);
  return report;
}

}  // namespace reverb
