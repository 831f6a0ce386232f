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

#include <gtest/gtest.h>

#include <random>

#include "reverb/inference.h"
#include "reverb/reparam.h"
#include "reverb/trainer.h"
#include "test_util.h"

namespace reverb {
namespace {

using testing::random_tensor;

constexpr double kMicro = 1e-6;

TEST(EstimateEnergy, ReferenceRows) {
  EXPECT_NEAR(estimate_energy(3.54e6, 71.20e6).energy_joules / kMicro, 49.73, 0.01);
  EXPECT_NEAR(estimate_energy(3.54e6, 74.50e6).energy_joules / kMicro, 49.99, 0.01);
}

TEST(EstimateEnergy, ZeroCounts) {
  EXPECT_EQ(estimate_energy(0, 0).energy_joules, 0.0);
}

TEST(EstimateEnergy, ExactIdentity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0, 1e9);
  for (int i = 0; i < 100; ++i) {
    const double f = d(rng);
    const double s = d(rng);
    const EnergyReport r = estimate_energy(f, s);
    EXPECT_EQ(r.energy_joules, f * 12.5e-12 + s * 77e-15);
    EXPECT_EQ(r.flops, f);
    EXPECT_EQ(r.sops, s);
  }
}

TEST(EstimateEnergy, NegativeCounts) {
  EXPECT_THROW(estimate_energy(-1, 0), DimensionError);
  EXPECT_THROW(estimate_energy(0, -1), DimensionError);
}

TEST(LayerAdditions, Dense) {
  BinaryLayer l;
  l.w_latent = Tensor({7, 11});
  EXPECT_EQ(layer_additions(l, {11}), 77u);
}

// One addition per (output position, tap) pair, padded taps included.
std::uint64_t conv_additions_by_loop(std::size_t ci, std::size_t co,
                                     std::size_t h, std::size_t w,
                                     std::size_t k, std::size_t stride,
                                     std::size_t pad) {
  std::uint64_t n = 0;
  for (std::size_t c = 0; c < co; ++c) {
    for (std::size_t oy = 0; oy * stride + k <= h + 2 * pad; ++oy) {
      for (std::size_t ox = 0; ox * stride + k <= w + 2 * pad; ++ox) {
        for (std::size_t i = 0; i < ci; ++i) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) ++n;
          }
        }
      }
    }
  }
  return n;
}

TEST(LayerAdditions, ConvMatchesLoop) {
  struct Case {
    std::size_t ci, co, h, w, k, stride, pad;
  };
  for (const Case c : {Case{1, 8, 8, 8, 3, 1, 1}, Case{8, 16, 8, 8, 3, 2, 1},
                       Case{3, 5, 7, 9, 3, 2, 0}, Case{2, 4, 5, 5, 1, 1, 0}}) {
    BinaryLayer l;
    l.kind = LayerKind::kConv;
    l.w_latent = Tensor({c.co, c.ci, c.k, c.k});
    l.stride = c.stride;
    l.padding = c.pad;
    EXPECT_EQ(layer_additions(l, {c.ci, c.h, c.w}),
              conv_additions_by_loop(c.ci, c.co, c.h, c.w, c.k, c.stride, c.pad));
  }
}

Network mlp(std::uint64_t seed = 0) {
  NetworkOptions o;
  o.seed = seed;
  return build_architecture("mlp-small", {64}, 10, o);
}

TEST(CountOps, MlpClosedForms) {
  const Network net = mlp();
  EXPECT_EQ(total_additions(net), 128u * 128u);
  EXPECT_EQ(count_flops(net, 1), 64.0 * 128 + 128.0 * 10);
  EXPECT_EQ(count_flops(net, 4), 4 * (64.0 * 128 + 128.0 * 10));
  EXPECT_EQ(count_sops(net, 0.0, 4), 0.0);
  EXPECT_EQ(count_sops(net, 0.25, 2), 0.5 * 128 * 128);
}

TEST(CountOps, AdditionPath) {
  const Network net = build_architecture("convnet-small", {1, 8, 8}, 10, NetworkOptions{});
  EXPECT_FALSE(on_addition_path(net, 0));
  EXPECT_TRUE(on_addition_path(net, 1));
  EXPECT_TRUE(on_addition_path(net, net.layers.size() - 2));
  EXPECT_FALSE(on_addition_path(net, net.layers.size() - 1));
}

TEST(MeasureSparsity, Bounds) {
  const Network net = mlp();
  SpikeRecords r;
  r.nonzero = {0, 0};
  r.opportunities = {256, 256};
  r.timesteps = 2;
  r.samples = 1;
  EXPECT_EQ(measure_sparsity(net, r).mean, 0.0);
  r.nonzero = {256, 256};
  EXPECT_EQ(measure_sparsity(net, r).mean, 1.0);
  r.nonzero = {64, 128};
  const SparsityReport s = measure_sparsity(net, r);
  EXPECT_EQ(s.per_layer, (std::vector<double>{0.25, 0.5}));
  // Only layer 1 is on the addition path; it consumes layer 0's spikes.
  EXPECT_EQ(s.mean, 0.25);
}

TEST(MeasureSparsity, EmptyRecords) {
  EXPECT_THROW(measure_sparsity(mlp(), SpikeRecords{}), StateError);
}

TEST(MeasureSparsity, PlainVersusWeighted) {
  const Network net = build_architecture("convnet-small", {1, 8, 8}, 10, NetworkOptions{});
  const std::size_t spiking = net.layers.size() - 1;
  SpikeRecords r;
  r.timesteps = 1;
  r.samples = 1;
  r.opportunities.assign(spiking, 1000);
  for (std::size_t l = 0; l < spiking; ++l) r.nonzero.push_back(100 * (l + 1));
  const std::vector<Shape> shapes = net.layer_output_shapes();
  double num = 0, den = 0, plain = 0;
  std::size_t count = 0;
  for (std::size_t l = 1; l + 1 < net.layers.size(); ++l) {
    const double a = static_cast<double>(layer_additions(net.layers[l], shapes[l - 1]));
    const double s = 0.1 * static_cast<double>(l);
    num += a * s;
    den += a;
    plain += s;
    ++count;
  }
  EXPECT_NEAR(measure_sparsity(net, r).mean, num / den, 1e-15);
  EXPECT_NEAR(measure_sparsity(net, r, SparsityWeighting::kPlain).mean,
              plain / static_cast<double>(count), 1e-15);
}

TEST(EnergyReport, MeasuredSopsMatchEstimateOnDenseNet) {
  std::mt19937_64 rng(2);
  NetworkOptions o;
  o.v_th = 0.3;
  o.seed = 3;
  const InferenceNetwork inf = fold_alpha(build_architecture("mlp-small", {64}, 10, o));
  const std::size_t n = 20;
  const EventInferenceResult r =
      run_event_inference(inf, random_tensor({n, 64}, rng, 0, 1), 2);
  const EnergyReport e = energy_report(inf.net, r.records);
  EXPECT_GT(e.sparsity, 0.0);
  EXPECT_LT(e.sparsity, 1.0);
  EXPECT_NEAR(e.sops * static_cast<double>(n), static_cast<double>(r.sops),
              1e-9 * static_cast<double>(r.sops));
  EXPECT_EQ(e.flops * static_cast<double>(n), r.flops);
  EXPECT_EQ(e.energy_joules, e.flops * kJoulesPerFlop + e.sops * kJoulesPerSop);
}

TEST(SpikeRecords, Merge) {
  SpikeRecords a{{1, 2}, {10, 10}, 2, 1};
  const SpikeRecords b{{3, 4}, {10, 10}, 2, 1};
  a.merge(b);
  EXPECT_EQ(a.nonzero, (std::vector<std::uint64_t>{4, 6}));
  EXPECT_EQ(a.samples, 2u);
  const SpikeRecords c{{1}, {1}, 2, 1};
  EXPECT_THROW(a.merge(c), DimensionError);
}

}  // namespace
}  // namespace reverb
