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

#include "reverb/inference.h"

#include <optional>
#include <string>
#include <vector>

#include "reverb/event_kernel.h"

namespace reverb {

namespace {

std::uint64_t count_nonzero(const Tensor& spikes) {
  std::uint64_t n = 0;
  for (double v : spikes.data()) n += v != 0.0;
  return n;
}

Tensor with_batch_axis(const Tensor& sample) {
  Shape s{1};
  s.insert(s.end(), sample.shape().begin(), sample.shape().end());
  return sample.reshaped(std::move(s));
}

void apply_affine(const BinaryLayer& layer, Tensor& current) {
  if (!layer.affine) return;
  for (std::size_t i = 0; i < current.size(); ++i) {
    const std::size_t c = channel_of(i, current.shape());
    current[i] = layer.affine->gamma[c] * current[i] + layer.affine->beta[c];
  }
}

// Number of accumulates each source index triggers.
std::vector<std::uint32_t> fanout_table(const BinaryLayer& layer,
                                        const Shape& input_shape) {
  std::vector<std::uint32_t> fanout(shape_size(input_shape), 0);
  for (std::size_t i = 0; i < fanout.size(); ++i) {
    for_each_fanout(layer.kind, input_shape, layer.out_channels(),
                    layer.kernel(), layer.stride, layer.padding, i,
                    [&](std::size_t, std::size_t, std::size_t, std::size_t,
                        std::size_t) { ++fanout[i]; });
  }
  return fanout;
}

}  // namespace

EventInferenceResult run_event_inference(const InferenceNetwork& inference,
                                         const Tensor& batch,
                                         std::size_t timesteps) {
  const Network& net = inference.net;
  inference.validate();
  if (timesteps == 0) throw DimensionError("timesteps must be positive");
  Shape expected{batch.rank() ? batch.dim(0) : 0};
  expected.insert(expected.end(), net.input_shape.begin(), net.input_shape.end());
  if (batch.shape() != expected) {
    throw DimensionError("batch " + shape_string(batch.shape()) +
                         " does not match network input " +
                         shape_string(net.input_shape));
  }

  const std::size_t depth = net.layers.size();
  const std::vector<Shape> shapes = net.layer_output_shapes();
  std::vector<std::optional<SignTable>> tables(depth);
  std::vector<std::vector<std::uint32_t>> fanout(depth);
  for (std::size_t l = 1; l + 1 < depth; ++l) {
    const BinaryLayer& layer = net.layers[l];
    if (layer.binarize) {
      tables[l].emplace(layer, shapes[l - 1]);
    } else if (net.neurons[l - 1].mode != FireMode::kBinary) {
      throw ModeError("layer " + std::to_string(l) +
                      " is real-valued but receives real-valued spikes; the "
                      "addition-only path cannot evaluate it");
    }
    fanout[l] = fanout_table(layer, shapes[l - 1]);
  }
  const double encoder_macs =
      static_cast<double>(layer_additions(net.layers[0], net.input_shape));
  const double classifier_macs =
      static_cast<double>(layer_additions(net.layers.back(), shapes[depth - 2]));

  const std::size_t n = batch.dim(0);
  EventInferenceResult result;
  result.o_out = Tensor({n, net.num_classes()});
  result.records.nonzero.assign(depth - 1, 0);
  result.records.opportunities.assign(depth - 1, 0);
  result.records.timesteps = timesteps;
  result.records.samples = n;

  for (std::size_t s = 0; s < n; ++s) {
    const Tensor x = with_batch_axis(batch.slice0(s));
    Tensor encoder = linear_forward(net.layers[0], net.layers[0].w_latent, x);
    apply_affine(net.layers[0], encoder);

    std::vector<LifState> states(depth - 1);
    for (std::size_t l = 0; l + 1 < depth; ++l) {
      Shape batched{1};
      batched.insert(batched.end(), shapes[l].begin(), shapes[l].end());
      states[l] = resting_state(batched);
    }
    std::vector<Tensor> outputs;
    for (std::size_t t = 0; t < timesteps; ++t) {
      result.flops += encoder_macs + classifier_macs;
      Tensor current = encoder;
      Tensor spikes;
      for (std::size_t l = 0; l + 1 < depth; ++l) {
        if (l > 0) {
          const EventList events =
              make_event_list(spikes.data(), shapes[l - 1], l - 1, t);
          std::vector<double> acc =
              tables[l] ? accumulate_signed_events<double>(*tables[l], events)
                        : accumulate_unit_events<double>(net.layers[l],
                                                         shapes[l - 1], events);
          for (const Event& e : events.events) result.sops += fanout[l][e.index];
          Shape batched{1};
          batched.insert(batched.end(), shapes[l].begin(), shapes[l].end());
          current = Tensor(batched, std::move(acc));
          apply_affine(net.layers[l], current);
        }
        LifState charged = membrane_update(states[l], current, net.neurons[l]);
        FireResult fired = fire(charged, net.neurons[l]);
        states[l] = std::move(fired.state);
        spikes = std::move(fired.spikes);
        result.records.nonzero[l] += count_nonzero(spikes);
        result.records.opportunities[l] += spikes.size();
      }
      const BinaryLayer& head = net.layers.back();
      Tensor logits = linear_forward(head, head.w_latent, spikes);
      outputs.push_back(std::move(logits));
    }
    const Tensor o = aggregate_output(outputs);
    for (std::size_t c = 0; c < o.size(); ++c) result.o_out.at(s, c) = o[c];
  }
  return result;
}

SpikeRecords record_spikes(const Network& net, const ForwardCache& cache) {
  if (cache.empty()) throw StateError("record_spikes: empty forward cache");
  const std::size_t spiking = net.layers.size() - 1;
  SpikeRecords r;
  r.nonzero.assign(spiking, 0);
  r.opportunities.assign(spiking, 0);
  r.timesteps = cache.timesteps;
  r.samples = cache.outputs.front().dim(0);
  for (const auto& step : cache.steps) {
    for (std::size_t l = 0; l < spiking; ++l) {
      const LayerStep& rec = step[l];
      const bool binary = net.neurons[l].mode == FireMode::kBinary;
      for (std::size_t i = 0; i < rec.fired.size(); ++i) {
        // A fired neuron at exactly U = 0 emits a zero-magnitude spike.
        if (rec.fired[i] != 0.0 && (binary || rec.u[i] != 0.0)) ++r.nonzero[l];
      }
      r.opportunities[l] += rec.fired.size();
    }
  }
  return r;
}

}  // namespace reverb
