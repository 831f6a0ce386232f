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

// Spatio-temporal backpropagation training. The static input is presented
// unchanged at every timestep, the classifier currents are averaged over
// time and scored with softmax cross-entropy, and gradients flow back through
// both layers and timesteps. A neuron that fired at t contributes no
// temporal gradient to t + 1 (the reset cuts that path).

#ifndef REVERB_TRAINER_H_
#define REVERB_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "reverb/binary_layer.h"
#include "reverb/dataset.h"
#include "reverb/network.h"
#include "reverb/tensor.h"

namespace reverb {

struct LayerStep {
  Tensor input;       // spikes entering the layer
  Tensor pre_affine;  // current before the affine (empty without one)
  Tensor u;           // membrane potential before reset (empty for classifier)
  Tensor fired;       // gate mask (empty for classifier)
};

struct ForwardCache {
  std::uint64_t revision = 0;
  std::size_t timesteps = 0;
  std::vector<std::vector<LayerStep>> steps;  // [t][layer]
  std::vector<Tensor> outputs;                // classifier current per t

  bool empty() const { return outputs.empty(); }
};

ForwardCache forward_pass(const Network& net, const Tensor& batch,
                          std::size_t timesteps);

// Mean over timesteps. Throws ArityError on an empty list.
Tensor aggregate_output(const std::vector<Tensor>& outputs);

// Mean over the batch of -log softmax(o_out)[label].
double ce_loss(const Tensor& o_out, const std::vector<int>& labels);
// dL/d(o_out) for ce_loss.
Tensor ce_loss_grad(const Tensor& o_out, const std::vector<int>& labels);

struct NetworkGrads {
  std::vector<LayerGrads> layers;
};

// `loss_grad` is dL/d(o_out). Throws StateError if the cache is empty or was
// produced by a different parameter revision.
NetworkGrads backward_stbp(const Network& net, const ForwardCache& cache,
                           const Tensor& loss_grad);

struct SgdState {
  std::vector<LayerGrads> velocity;
};

// v <- momentum * v + g; p <- p - lr * v. Then clips binarized latent weights
// to [-1, 1] and floors alpha at kAlphaFloor.
void sgd_step(Network& net, const NetworkGrads& grads, double lr,
              double momentum, SgdState& state);

double cosine_lr(int epoch, int total_epochs, double lr0);

struct TrainConfig {
  int epochs = 10;
  std::size_t batch_size = 32;
  double lr0 = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochMetrics> metrics;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Throws TrainingError (carrying the epoch) when the loss diverges.
TrainResult train(Network net, const Dataset& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Predicted class per sample (argmax of the time-averaged output).
std::vector<int> predict(const Network& net, const Tensor& batch);
double evaluate_accuracy(const Network& net, const Dataset& data,
                         std::size_t batch_size = 128);

}  // namespace reverb

#endif  // REVERB_TRAINER_H_
