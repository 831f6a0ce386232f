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

#include "reverb/energy.h"

#include <cmath>
#include <string>

namespace reverb {

void SpikeRecords::merge(const SpikeRecords& other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  if (other.nonzero.size() != nonzero.size() || other.timesteps != timesteps) {
    throw DimensionError("cannot merge spike records of different networks");
  }
  for (std::size_t l = 0; l < nonzero.size(); ++l) {
    nonzero[l] += other.nonzero[l];
    opportunities[l] += other.opportunities[l];
  }
  samples += other.samples;
}

bool on_addition_path(const Network& net, std::size_t layer) {
  return layer > 0 && layer + 1 < net.layers.size();
}

std::uint64_t layer_additions(const BinaryLayer& layer,
                              const Shape& input_shape) {
  const Shape out = layer.output_shape(input_shape);
  if (layer.kind == LayerKind::kDense) {
    return static_cast<std::uint64_t>(layer.out_channels()) *
           shape_size(input_shape);
  }
  const std::uint64_t k = layer.kernel();
  return static_cast<std::uint64_t>(out[0]) * out[1] * out[2] *
         layer.in_channels() * k * k;
}

std::uint64_t total_additions(const Network& net) {
  const std::vector<Shape> shapes = net.layer_output_shapes();
  std::uint64_t a = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (on_addition_path(net, l)) a += layer_additions(net.layers[l], shapes[l - 1]);
  }
  return a;
}

SparsityReport measure_sparsity(const Network& net, const SpikeRecords& records,
                                SparsityWeighting weighting) {
  if (records.empty()) throw StateError("measure_sparsity: no spike records");
  if (records.nonzero.size() != net.layers.size() - 1) {
    throw DimensionError("spike records do not match the network depth");
  }
  SparsityReport report;
  for (std::size_t l = 0; l < records.nonzero.size(); ++l) {
    report.per_layer.push_back(
        records.opportunities[l] == 0
            ? 0.0
            : static_cast<double>(records.nonzero[l]) /
                  static_cast<double>(records.opportunities[l]));
  }
  const std::vector<Shape> shapes = net.layer_output_shapes();
  double weighted = 0.0;
  double weight = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!on_addition_path(net, l)) continue;
    const double w =
        weighting == SparsityWeighting::kAdditionWeighted
            ? static_cast<double>(layer_additions(net.layers[l], shapes[l - 1]))
            : 1.0;
    weighted += w * report.per_layer[l - 1];
    weight += w;
  }
  if (weight > 0.0) {
    report.mean = weighted / weight;
  } else {
    for (double s : report.per_layer) report.mean += s;
    report.mean /= static_cast<double>(report.per_layer.size());
  }
  return report;
}

double count_flops(const Network& net, std::size_t timesteps) {
  const std::vector<Shape> shapes = net.layer_output_shapes();
  double macs = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (on_addition_path(net, l)) continue;
    const Shape& in = l == 0 ? net.input_shape : shapes[l - 1];
    macs += static_cast<double>(layer_additions(net.layers[l], in));
  }
  return macs * static_cast<double>(timesteps);
}

double count_sops(const Network& net, double sparsity, std::size_t timesteps) {
  return sparsity * static_cast<double>(timesteps) *
         static_cast<double>(total_additions(net));
}

EnergyReport estimate_energy(double flops, double sops) {
  if (!(flops >= 0.0) || !(sops >= 0.0)) {
    throw DimensionError("operation counts must be non-negative");
  }
  EnergyReport r;
  r.flops = flops;
  r.sops = sops;
  r.energy_joules = flops * kJoulesPerFlop + sops * kJoulesPerSop;
  return r;
}

EnergyReport energy_report(const Network& net, const SpikeRecords& records,
                           SparsityWeighting weighting) {
  const SparsityReport s = measure_sparsity(net, records, weighting);
  EnergyReport r = estimate_energy(count_flops(net, records.timesteps),
                                   count_sops(net, s.mean, records.timesteps));
  r.layer_sparsity = s.per_layer;
  r.sparsity = s.mean;
  r.timesteps = records.timesteps;
  return r;
}

}  // namespace reverb
