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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "reverb/trainer.h"
#include "test_util.h"

namespace reverb {
namespace {

using testing::random_tensor;

Network mlp(double v_th, std::uint64_t seed, TrainMode mode = TrainMode::kReverbLearnable) {
  NetworkOptions o;
  o.mode = mode;
  o.v_th = v_th;
  o.seed = seed;
  return build_architecture("mlp-small", {16}, 4, o);
}

Network convnet(double v_th, std::uint64_t seed) {
  NetworkOptions o;
  o.v_th = v_th;
  o.seed = seed;
  return build_architecture("convnet-small", {1, 8, 8}, 4, o);
}

TEST(FoldAlpha, UnitAlphaOnlyBinarizesWeights) {
  Network net = mlp(0.0, 1);
  for (double& a : net.layers[1].alpha) a = 1.0;
  const InferenceNetwork inf = fold_alpha(net);
  EXPECT_EQ(inf.net.neurons, net.neurons);
  EXPECT_EQ(inf.net.layers[1].w_latent, binarize_weights(net.layers[1].w_latent));
  EXPECT_EQ(inf.net.layers[0], net.layers[0]);
  EXPECT_EQ(inf.net.layers[2], net.layers[2]);
}

TEST(FoldAlpha, UniformAlphaMovesIntoPreviousScale) {
  Network net = mlp(0.0, 2);
  for (double& a : net.layers[1].alpha) a = 0.5;
  const InferenceNetwork inf = fold_alpha(net);
  const NeuronParams& prev = inf.net.neurons[0];
  EXPECT_EQ(prev.mode, FireMode::kScaledReal);
  ASSERT_EQ(prev.scale.size(), 128u);
  for (double s : prev.scale) EXPECT_EQ(s, 0.5);
  for (double a : inf.net.layers[1].alpha) EXPECT_EQ(a, 1.0);
  EXPECT_FALSE(inf.net.layers[1].learn_alpha);
}

TEST(FoldAlpha, PerChannelAlphaScalesOwnNeurons) {
  Network net = mlp(0.3, 3);
  std::vector<double>& alpha = net.layers[1].alpha;
  for (std::size_t c = 0; c < alpha.size(); ++c) alpha[c] = 0.25 + 0.01 * static_cast<double>(c);
  const InferenceNetwork inf = fold_alpha(net);
  const NeuronParams& own = inf.net.neurons[1];
  ASSERT_EQ(own.scale.size(), alpha.size());
  for (std::size_t c = 0; c < alpha.size(); ++c) {
    EXPECT_EQ(own.scale[c], alpha[c]);
    EXPECT_EQ(own.channel_v_th[c], 0.3 / alpha[c]);
  }
}

TEST(FoldAlpha, RefoldIsNoop) {
  const InferenceNetwork once = fold_alpha(mlp(0.1, 4));
  const InferenceNetwork twice = fold_alpha(once.net);
  EXPECT_TRUE(same_parameters(once.net, twice.net));
}

TEST(FoldAlpha, BinaryPreviousNeuronIsFoldError) {
  Network net = mlp(0.0, 5);
  net.neurons[0].mode = FireMode::kBinary;
  for (double& a : net.layers[1].alpha) a = 0.5;
  try {
    fold_alpha(net);
    FAIL() << "expected FoldError";
  } catch (const FoldError& e) {
    EXPECT_NE(std::string(e.what()).find("layers 0 -> 1"), std::string::npos) << e.what();
  }
}

TEST(FoldAlpha, SurrogateTransformIsModeError) {
  Network net = mlp(0.0, 6);
  net.transform = WeightTransform::kClippedIdentity;
  EXPECT_THROW(fold_alpha(net), ModeError);
}

TEST(FoldAlpha, WeightsArePureSigns) {
  const InferenceNetwork inf = fold_alpha(convnet(0.25, 7));
  for (const BinaryLayer& l : inf.net.layers) {
    if (!l.binarize) continue;
    for (double w : l.w_latent.data()) EXPECT_TRUE(w == 1.0 || w == -1.0);
    for (double a : l.alpha) EXPECT_EQ(a, 1.0);
  }
  EXPECT_NO_THROW(inf.validate());
}

TEST(VerifyEquivalence, ZeroProbesAboveThreshold) {
  const Network net = mlp(0.25, 8);
  const EquivalenceReport r = verify_equivalence(net, fold_alpha(net), Tensor({4, 16}), 2);
  EXPECT_EQ(r.max_abs_diff, 0.0);
}

TEST(VerifyEquivalence, RandomProbesMatch) {
  std::mt19937_64 rng(9);
  for (double v_th : {0.0, 0.25}) {
    for (std::size_t timesteps : {1u, 2u, 4u}) {
      const Network net = mlp(v_th, 10);
      const EquivalenceReport r = verify_equivalence(
          net, fold_alpha(net), random_tensor({100, 16}, rng, 0, 1), timesteps);
      EXPECT_LE(r.max_rel_diff, 1e-9) << "v_th=" << v_th << " T=" << timesteps;
      const Network conv = convnet(v_th, 11);
      const EquivalenceReport rc = verify_equivalence(
          conv, fold_alpha(conv), random_tensor({20, 1, 8, 8}, rng, 0, 1), timesteps);
      EXPECT_LE(rc.max_rel_diff, 1e-9) << "conv v_th=" << v_th << " T=" << timesteps;
    }
  }
}

TEST(VerifyEquivalence, DetectsPerturbedScale) {
  std::mt19937_64 rng(12);
  const Network net = mlp(0.0, 13);
  InferenceNetwork inf = fold_alpha(net);
  NeuronParams& p = inf.net.neurons[1];
  p.scale[0] *= 1.5;
  const EquivalenceReport r =
      verify_equivalence(net, inf, random_tensor({32, 16}, rng, 0, 1), 2);
  EXPECT_GT(r.max_abs_diff, 0.0);
}

// Power-of-two amplitudes make every rescaling exact.
TEST(VerifyEquivalence, DyadicAlphaIsBitwiseEqual) {
  std::mt19937_64 rng(14);
  Network net = mlp(0.0, 15);
  std::vector<double>& alpha = net.layers[1].alpha;
  for (std::size_t c = 0; c < alpha.size(); ++c) alpha[c] = std::ldexp(1.0, -static_cast<int>(c % 5));
  const EquivalenceReport r =
      verify_equivalence(net, fold_alpha(net), random_tensor({16, 16}, rng, 0, 1), 2);
  EXPECT_TRUE(r.bitwise_equal);
}

TEST(VerifyEquivalence, TrainedNetworkStaysEquivalent) {
  const DatasetSplits data = load_dataset("synthetic:two-gaussians", 0);
  NetworkOptions o;
  o.seed = 3;
  TrainConfig c;
  c.epochs = 3;
  c.lr0 = 0.02;
  const Network trained =
      train(build_architecture("mlp-small", {16}, 2, o), data.train, c).net;
  const InferenceNetwork inf = fold_alpha(trained);
  const EquivalenceReport r = verify_equivalence(trained, inf, data.test.x, 2);
  EXPECT_LE(r.max_rel_diff, 1e-9);
  EXPECT_EQ(predict(trained, data.test.x), predict(inf.net, data.test.x));
}

}  // namespace
}  // namespace reverb
