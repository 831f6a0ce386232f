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

#include "reverb/trainer.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace reverb {

namespace {

void check_batch(const Network& net, const Tensor& batch) {
  Shape expected{batch.rank() ? batch.dim(0) : 0};
  expected.insert(expected.end(), net.input_shape.begin(), net.input_shape.end());
  if (batch.shape() != expected) {
    throw DimensionError("batch " + shape_string(batch.shape()) +
                         " does not match network input " +
                         shape_string(net.input_shape));
  }
}

Tensor apply_affine_copy(const Affine& affine, const Tensor& z) {
  Tensor out(z.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t c = channel_of(i, z.shape());
    out[i] = affine.gamma[c] * z[i] + affine.beta[c];
  }
  return out;
}

}  // namespace

ForwardCache forward_pass(const Network& net, const Tensor& batch,
                          std::size_t timesteps) {
  if (timesteps == 0) throw DimensionError("timesteps must be positive");
  check_batch(net, batch);
  const std::size_t depth = net.layers.size();

  std::vector<Tensor> weights;
  weights.reserve(depth);
  for (const BinaryLayer& layer : net.layers) {
    weights.push_back(applied_weights(layer, net.transform));
  }

  ForwardCache cache;
  cache.revision = net.revision;
  cache.timesteps = timesteps;
  cache.steps.resize(timesteps);

  // Direct encoding: the encoder sees the same input at every step, so its
  // current is computed once.
  const Tensor encoder_z = linear_forward(net.layers[0], weights[0], batch);

  std::vector<LifState> states(depth - 1);
  for (std::size_t t = 0; t < timesteps; ++t) {
    std::vector<LayerStep>& step = cache.steps[t];
    step.resize(depth);
    Tensor spikes = batch;
    for (std::size_t l = 0; l < depth; ++l) {
      const BinaryLayer& layer = net.layers[l];
      LayerStep& rec = step[l];
      Tensor z = l == 0 ? encoder_z : linear_forward(layer, weights[l], spikes);
      rec.input = std::move(spikes);
      Tensor current;
      if (layer.affine) {
        current = apply_affine_copy(*layer.affine, z);
        rec.pre_affine = std::move(z);
      } else {
        current = std::move(z);
      }
      if (l + 1 == depth) {
        cache.outputs.push_back(std::move(current));
        break;
      }
      if (t == 0) states[l] = resting_state(current.shape());
      LifState charged = membrane_update(states[l], current, net.neurons[l]);
      FireResult fired = fire(charged, net.neurons[l]);
      rec.u = std::move(charged.u);
      rec.fired = std::move(fired.fired);
      states[l] = std::move(fired.state);
      spikes = std::move(fired.spikes);
    }
  }
  return cache;
}

Tensor aggregate_output(const std::vector<Tensor>& outputs) {
  if (outputs.empty()) throw ArityError("aggregate_output: no timesteps");
  Tensor total(outputs.front().shape());
  for (const Tensor& o : outputs) add_inplace(total, o);
  return scale(total, 1.0 / static_cast<double>(outputs.size()));
}

namespace {

void check_labels(const Tensor& o_out, const std::vector<int>& labels) {
  if (o_out.rank() != 2 || o_out.dim(0) != labels.size()) {
    throw DimensionError("logits " + shape_string(o_out.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
  }
  const int classes = static_cast<int>(o_out.dim(1));
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw IndexError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

// log sum_j exp(row_j), shifted by the row max.
double log_sum_exp(const double* row, std::size_t n) {
  const double m = *std::max_element(row, row + n);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::exp(row[j] - m);
  return m + std::log(s);
}

}  // namespace

double ce_loss(const Tensor& o_out, const std::vector<int>& labels) {
  check_labels(o_out, labels);
  const std::size_t n = o_out.dim(0);
  const std::size_t c = o_out.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = o_out.data().data() + i * c;
    total += log_sum_exp(row, c) - row[labels[i]];
  }
  return total / static_cast<double>(n);
}

Tensor ce_loss_grad(const Tensor& o_out, const std::vector<int>& labels) {
  check_labels(o_out, labels);
  const std::size_t n = o_out.dim(0);
  const std::size_t c = o_out.dim(1);
  Tensor g(o_out.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = o_out.data().data() + i * c;
    const double lse = log_sum_exp(row, c);
    for (std::size_t j = 0; j < c; ++j) {
      g.at(i, j) = std::exp(row[j] - lse) / static_cast<double>(n);
    }
    g.at(i, static_cast<std::size_t>(labels[i])) -= 1.0 / static_cast<double>(n);
  }
  return g;
}

NetworkGrads backward_stbp(const Network& net, const ForwardCache& cache,
                           const Tensor& loss_grad) {
  if (cache.empty()) throw StateError("backward_stbp: empty forward cache");
  if (cache.revision != net.revision) {
    throw StateError("backward_stbp: forward cache is stale (revision " +
                     std::to_string(cache.revision) + ", network at " +
                     std::to_string(net.revision) + ")");
  }
  const std::size_t depth = net.layers.size();
  const std::size_t steps = cache.timesteps;
  if (cache.steps.size() != steps || cache.outputs.size() != steps ||
      cache.steps.front().size() != depth) {
    throw StateError("backward_stbp: cache does not match the network");
  }
  if (loss_grad.shape() != cache.outputs.front().shape()) {
    throw DimensionError("backward_stbp: loss gradient " +
                         shape_string(loss_grad.shape()) + " vs output " +
                         shape_string(cache.outputs.front().shape()));
  }

  NetworkGrads grads;
  for (const BinaryLayer& layer : net.layers) {
    grads.layers.push_back(zero_grads(layer));
  }

  // O_out = (1/T) sum_t O_t.
  std::vector<Tensor> grad_current(
      steps, scale(loss_grad, 1.0 / static_cast<double>(steps)));

  for (std::size_t l = depth; l-- > 0;) {
    const BinaryLayer& layer = net.layers[l];
    if (l + 1 < depth) {
      // grad_current holds dL/dO for this layer; turn it into dL/dU walking
      // backwards in time.
      const NeuronParams& params = net.neurons[l];
      Tensor carry;  // dL/dU[t+1] * dU[t+1]/dU[t]
      for (std::size_t t = steps; t-- > 0;) {
        const LayerStep& rec = cache.steps[t][l];
        Tensor g_u = hadamard(grad_current[t], fire_backward(rec.u, params));
        if (!carry.empty()) add_inplace(g_u, carry);
        if (t > 0) {
          const Tensor& prev_fired = cache.steps[t - 1][l].fired;
          carry = Tensor(g_u.shape());
          for (std::size_t i = 0; i < g_u.size(); ++i) {
            carry[i] = g_u[i] * params.tau * (1.0 - prev_fired[i]);
          }
        }
        grad_current[t] = std::move(g_u);
      }
    }
    for (std::size_t t = 0; t < steps; ++t) {
      const LayerStep& rec = cache.steps[t][l];
      Tensor g_in = backward(layer, rec.input, grad_current[t], rec.pre_affine,
                             net.transform, grads.layers[l]);
      if (l > 0) grad_current[t] = std::move(g_in);
    }
  }
  return grads;
}

namespace {

void momentum_update(std::span<double> param, std::span<const double> grad,
                     std::span<double> velocity, double lr, double momentum) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i];
    param[i] -= lr * velocity[i];
  }
}

}  // namespace

void sgd_step(Network& net, const NetworkGrads& grads, double lr,
              double momentum, SgdState& state) {
  if (grads.layers.size() != net.layers.size()) {
    throw DimensionError("sgd_step: gradient count does not match layers");
  }
  if (state.velocity.empty()) {
    for (const BinaryLayer& layer : net.layers) {
      state.velocity.push_back(zero_grads(layer));
    }
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    BinaryLayer& layer = net.layers[l];
    const LayerGrads& g = grads.layers[l];
    LayerGrads& v = state.velocity[l];
    if (g.w.shape() != layer.w_latent.shape()) {
      throw DimensionError("sgd_step: weight gradient shape mismatch at layer " +
                           std::to_string(l));
    }
    momentum_update(layer.w_latent.data(), g.w.data(), v.w.data(), lr, momentum);
    if (layer.learn_alpha) {
      momentum_update(layer.alpha, g.alpha, v.alpha, lr, momentum);
      for (double& a : layer.alpha) a = std::max(a, kAlphaFloor);
    }
    if (layer.affine) {
      momentum_update(layer.affine->gamma, g.gamma, v.gamma, lr, momentum);
      momentum_update(layer.affine->beta, g.beta, v.beta, lr, momentum);
    }
    if (layer.binarize) layer = clip_latent(std::move(layer));
    layer.w_latent.check_finite("sgd_step");
  }
  ++net.revision;
}

double cosine_lr(int epoch, int total_epochs, double lr0) {
  if (total_epochs <= 0) return lr0;
  const double progress =
      static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ModeError("epochs must be non-negative");
  if (batch_size == 0) throw ModeError("batch size must be positive");
  if (!(lr0 >= 0.0)) throw ModeError("lr0 must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ModeError("momentum must lie in [0, 1)");
  }
}

namespace {

std::size_t argmax_row(const Tensor& logits, std::size_t row) {
  const std::size_t c = logits.dim(1);
  const double* p = logits.data().data() + row * c;
  return static_cast<std::size_t>(std::max_element(p, p + c) - p);
}

}  // namespace

TrainResult train(Network net, const Dataset& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (data.size() == 0) throw StateError("train: empty dataset");
  net.validate();
  if (data.num_classes > net.num_classes()) {
    throw DimensionError("dataset has more classes than the classifier");
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SgdState sgd;
  TrainResult result;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.epochs, config.lr0);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    try {
      for (std::size_t begin = 0; begin < order.size();
           begin += config.batch_size) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        const Dataset batch = data.gather(
            std::span<const std::size_t>(order.data() + begin, end - begin));
        const ForwardCache cache = forward_pass(net, batch.x, net.timesteps);
        const Tensor o_out = aggregate_output(cache.outputs);
        const double loss = ce_loss(o_out, batch.y);
        if (!std::isfinite(loss)) {
          throw TrainingError("loss diverged", epoch);
        }
        loss_sum += loss * static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
          if (static_cast<int>(argmax_row(o_out, i)) == batch.y[i]) ++correct;
        }
        const NetworkGrads grads =
            backward_stbp(net, cache, ce_loss_grad(o_out, batch.y));
        sgd_step(net, grads, lr, config.momentum, sgd);
      }
    } catch (const NumericError& e) {
      throw TrainingError(std::string("numeric failure: ") + e.what(), epoch);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.loss = loss_sum / static_cast<double>(data.size());
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  result.net = std::move(net);
  return result;
}

std::vector<int> predict(const Network& net, const Tensor& batch) {
  const ForwardCache cache = forward_pass(net, batch, net.timesteps);
  const Tensor o_out = aggregate_output(cache.outputs);
  std::vector<int> out(o_out.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<int>(argmax_row(o_out, i));
  }
  return out;
}

double evaluate_accuracy(const Network& net, const Dataset& data,
                         std::size_t batch_size) {
  if (data.size() == 0) throw StateError("evaluate_accuracy: empty dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < idx.size(); begin += batch_size) {
    const std::size_t end = std::min(idx.size(), begin + batch_size);
    const Dataset batch =
        data.gather(std::span<const std::size_t>(idx.data() + begin, end - begin));
    const std::vector<int> pred = predict(net, batch.x);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == batch.y[i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace reverb
