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

#include "reverb/binary_layer.h"

#include <algorithm>
#include <string>

#include "reverb/neuron.h"

namespace reverb {

Shape BinaryLayer::output_shape(const Shape& input) const {
  if (kind == LayerKind::kDense) {
    if (shape_size(input) != in_channels()) {
      throw DimensionError("dense layer expects " +
                           std::to_string(in_channels()) + " inputs, got " +
                           shape_string(input));
    }
    return {out_channels()};
  }
  if (input.size() != 3 || input[0] != in_channels()) {
    throw DimensionError("conv layer expects [" + std::to_string(in_channels()) +
                         ", H, W] input, got " + shape_string(input));
  }
  return {out_channels(), conv_output_size(input[1], kernel(), stride, padding),
          conv_output_size(input[2], kernel(), stride, padding)};
}

Tensor binarize_weights(const Tensor& w) {
  Tensor out(w.shape());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] >= 0.0 ? 1.0 : -1.0;
  return out;
}

Tensor transform_weights(const Tensor& w, WeightTransform transform) {
  if (transform == WeightTransform::kSign) return binarize_weights(w);
  Tensor out(w.shape());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::clamp(w[i], -1.0, 1.0);
  return out;
}

Tensor effective_weights(const BinaryLayer& layer, WeightTransform transform) {
  if (!layer.binarize) {
    throw ModeError("effective_weights called on a real-valued layer");
  }
  const std::size_t channels = layer.out_channels();
  if (layer.alpha.size() != channels) {
    throw DimensionError("alpha has " + std::to_string(layer.alpha.size()) +
                         " entries for " + std::to_string(channels) +
                         " output channels");
  }
  Tensor w = transform_weights(layer.w_latent, transform);
  const std::size_t per_channel = w.size() / channels;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t j = 0; j < per_channel; ++j) {
      w[c * per_channel + j] *= layer.alpha[c];
    }
  }
  return w;
}

Tensor applied_weights(const BinaryLayer& layer, WeightTransform transform) {
  return layer.binarize ? effective_weights(layer, transform) : layer.w_latent;
}

namespace {

Tensor as_rows(const Tensor& spikes) {
  if (spikes.rank() < 2) {
    throw DimensionError("batched input needs a leading batch axis, got " +
                         shape_string(spikes.shape()));
  }
  const std::size_t n = spikes.dim(0);
  return spikes.reshaped({n, spikes.size() / n});
}

void apply_affine(const Affine& affine, Tensor& current) {
  const Shape& shape = current.shape();
  for (std::size_t i = 0; i < current.size(); ++i) {
    const std::size_t c = channel_of(i, shape);
    current[i] = affine.gamma[c] * current[i] + affine.beta[c];
  }
}

}  // namespace

Tensor linear_forward(const BinaryLayer& layer, const Tensor& weights,
                      const Tensor& spikes) {
  if (layer.kind == LayerKind::kDense) {
    Tensor x = as_rows(spikes);
    if (x.dim(1) != weights.dim(1)) {
      throw DimensionError("dense layer expects " +
                           std::to_string(weights.dim(1)) +
                           " inputs per sample, got " +
                           shape_string(spikes.shape()));
    }
    return matmul(x, transpose(weights));
  }
  if (spikes.rank() != 4) {
    throw DimensionError("conv layer expects [N, C, H, W] input, got " +
                         shape_string(spikes.shape()));
  }
  const std::size_t n = spikes.dim(0);
  Tensor first = conv2d(spikes.slice0(0), weights, layer.stride, layer.padding);
  Shape out_shape{n};
  out_shape.insert(out_shape.end(), first.shape().begin(), first.shape().end());
  Tensor out(out_shape);
  out.set_slice0(0, first);
  for (std::size_t i = 1; i < n; ++i) {
    out.set_slice0(i, conv2d(spikes.slice0(i), weights, layer.stride,
                             layer.padding));
  }
  return out;
}

Tensor forward(const BinaryLayer& layer, const Tensor& spikes,
               WeightTransform transform) {
  Tensor current =
      linear_forward(layer, applied_weights(layer, transform), spikes);
  if (layer.affine) apply_affine(*layer.affine, current);
  return current;
}

Tensor ste_weight_grad(const Tensor& grad_out_w_b, const Tensor& w_latent) {
  if (grad_out_w_b.shape() != w_latent.shape()) {
    throw DimensionError("ste_weight_grad: gradient " +
                         shape_string(grad_out_w_b.shape()) + " vs weights " +
                         shape_string(w_latent.shape()));
  }
  Tensor g(w_latent.shape());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = (w_latent[i] >= -1.0 && w_latent[i] <= 1.0) ? grad_out_w_b[i] : 0.0;
  }
  return g;
}

std::vector<double> alpha_grad(const Tensor& grad_u, const Tensor& w_sign,
                               const Tensor& spikes_in, LayerKind kind,
                               std::size_t stride, std::size_t padding) {
  BinaryLayer probe;
  probe.kind = kind;
  probe.stride = stride;
  probe.padding = padding;
  probe.w_latent = w_sign;
  const Tensor z = linear_forward(probe, w_sign, spikes_in);
  if (z.shape() != grad_u.shape()) {
    throw DimensionError("alpha_grad: gradient " + shape_string(grad_u.shape()) +
                         " vs current " + shape_string(z.shape()));
  }
  std::vector<double> g(w_sign.dim(0), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    g[channel_of(i, z.shape())] += grad_u[i] * z[i];
  }
  return g;
}

BinaryLayer clip_latent(BinaryLayer layer) {
  if (!layer.binarize) throw ModeError("clip_latent on a real-valued layer");
  for (double& w : layer.w_latent.data()) w = std::clamp(w, -1.0, 1.0);
  return layer;
}

LayerGrads zero_grads(const BinaryLayer& layer) {
  LayerGrads g;
  g.w = Tensor(layer.w_latent.shape());
  g.alpha.assign(layer.alpha.size(), 0.0);
  if (layer.affine) {
    g.gamma.assign(layer.affine->gamma.size(), 0.0);
    g.beta.assign(layer.affine->beta.size(), 0.0);
  }
  return g;
}

Tensor backward(const BinaryLayer& layer, const Tensor& spikes,
                const Tensor& grad_current, const Tensor& pre_affine,
                WeightTransform transform, LayerGrads& grads) {
  Tensor gz = grad_current;
  if (layer.affine) {
    const Shape& shape = grad_current.shape();
    for (std::size_t i = 0; i < gz.size(); ++i) {
      const std::size_t c = channel_of(i, shape);
      grads.gamma[c] += grad_current[i] * pre_affine[i];
      grads.beta[c] += grad_current[i];
      gz[i] = grad_current[i] * layer.affine->gamma[c];
    }
  }

  const Tensor weights = applied_weights(layer, transform);
  Tensor grad_weights(layer.w_latent.shape());
  Tensor grad_in;
  if (layer.kind == LayerKind::kDense) {
    const Tensor x = as_rows(spikes);
    grad_weights = matmul(transpose(gz), x);
    grad_in = matmul(gz, weights).reshaped(spikes.shape());
  } else {
    grad_in = Tensor(spikes.shape());
    const Shape sample_shape(spikes.shape().begin() + 1, spikes.shape().end());
    for (std::size_t n = 0; n < spikes.dim(0); ++n) {
      const Tensor g = gz.slice0(n);
      add_inplace(grad_weights,
                  conv2d_backward_kernels(g, spikes.slice0(n), weights.shape(),
                                          layer.stride, layer.padding));
      grad_in.set_slice0(n, conv2d_backward_input(g, weights, sample_shape,
                                                  layer.stride, layer.padding));
    }
  }

  if (!layer.binarize) {
    add_inplace(grads.w, grad_weights);
    return grad_in;
  }

  // W_eff = alpha_c * T(w): dL/dw = alpha_c * dL/dW_eff * STE window.
  const std::size_t channels = layer.out_channels();
  const std::size_t per_channel = grad_weights.size() / channels;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t j = 0; j < per_channel; ++j) {
      grad_weights[c * per_channel + j] *= layer.alpha[c];
    }
  }
  add_inplace(grads.w, ste_weight_grad(grad_weights, layer.w_latent));
  if (layer.learn_alpha) {
    const std::vector<double> ga =
        alpha_grad(gz, transform_weights(layer.w_latent, transform), spikes,
                   layer.kind, layer.stride, layer.padding);
    for (std::size_t c = 0; c < channels; ++c) grads.alpha[c] += ga[c];
  }
  return grad_in;
}

}  // namespace reverb
