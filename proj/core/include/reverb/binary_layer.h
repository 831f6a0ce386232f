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

#ifndef REVERB_BINARY_LAYER_H_
#define REVERB_BINARY_LAYER_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "reverb/tensor.h"

namespace reverb {

enum class LayerKind { kDense, kConv };

// How a binarized layer turns latent weights into the weights it applies.
// kClippedIdentity replaces sign(w) with clamp(w, -1, 1); its derivative is
// exactly the straight-through estimate, so gradient checks run against it.
enum class WeightTransform { kSign, kClippedIdentity };

// Learned per-output-channel scale and shift on the synaptic current. Only
// used on real-valued layers.
struct Affine {
  std::vector<double> gamma;
  std::vector<double> beta;

  friend bool operator==(const Affine&, const Affine&) = default;
};

// Weights are [out, in] for dense layers and [C_out, C_in, k, k] for conv
// layers. A dense layer accepts any input whose per-sample size equals `in`
// (conv feature maps are flattened in row-major order).
struct BinaryLayer {
  LayerKind kind = LayerKind::kDense;
  Tensor w_latent;
  // One amplitude per output channel (per output neuron for dense layers).
  std::vector<double> alpha;
  bool binarize = false;
  bool learn_alpha = false;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::optional<Affine> affine;

  std::size_t out_channels() const { return w_latent.dim(0); }
  std::size_t in_channels() const { return w_latent.dim(1); }
  std::size_t kernel() const {
    return kind == LayerKind::kConv ? w_latent.dim(2) : 1;
  }
  // Per-sample output shape for a per-sample input shape.
  Shape output_shape(const Shape& input) const;

  friend bool operator==(const BinaryLayer&, const BinaryLayer&) = default;
};

// Smallest admissible amplitude; keeps alpha strictly positive.
inline constexpr double kAlphaFloor = 1e-4;

// +1 where w >= 0, -1 elsewhere.
Tensor binarize_weights(const Tensor& w);
Tensor transform_weights(const Tensor& w, WeightTransform transform);

// alpha_c * transform(w) with alpha broadcast over output channel c.
// Throws ModeError on a real-valued layer.
Tensor effective_weights(const BinaryLayer& layer,
                         WeightTransform transform = WeightTransform::kSign);

// Weights actually applied by `forward`: effective weights when binarized,
// w_latent otherwise.
Tensor applied_weights(const BinaryLayer& layer,
                       WeightTransform transform = WeightTransform::kSign);

// Synaptic current for a batch of spikes [N, ...]; includes the affine when
// present.
Tensor forward(const BinaryLayer& layer, const Tensor& spikes,
               WeightTransform transform = WeightTransform::kSign);

// Current before the affine, with explicit weights.
Tensor linear_forward(const BinaryLayer& layer, const Tensor& weights,
                      const Tensor& spikes);

// Straight-through estimate: passes grad where -1 <= w <= 1, zero elsewhere.
Tensor ste_weight_grad(const Tensor& grad_out_w_b, const Tensor& w_latent);

// dL/dalpha_c = sum over batch and positions of grad_u * (w_sign . spikes)
// restricted to channel c. Call once per timestep and accumulate.
std::vector<double> alpha_grad(const Tensor& grad_u, const Tensor& w_sign,
                               const Tensor& spikes_in, LayerKind kind,
                               std::size_t stride = 1, std::size_t padding = 0);

// Clamps w_latent to [-1, 1]. Throws ModeError on a real-valued layer.
BinaryLayer clip_latent(BinaryLayer layer);

struct LayerGrads {
  Tensor w;
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<double> beta;
};

LayerGrads zero_grads(const BinaryLayer& layer);

// Accumulates parameter gradients for one timestep into `grads` and returns
// dL/d(spikes). `pre_affine` is the current before the affine (ignored when
// the layer has none).
Tensor backward(const BinaryLayer& layer, const Tensor& spikes,
                const Tensor& grad_current, const Tensor& pre_affine,
                WeightTransform transform, LayerGrads& grads);

}  // namespace reverb

#endif  // REVERB_BINARY_LAYER_H_
