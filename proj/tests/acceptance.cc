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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reverb/checkpoint.h"
#include "reverb/energy.h"
#include "reverb/event_kernel.h"
#include "reverb/gradcheck.h"
#include "reverb/reparam.h"
#include "reverb/trainer.h"
#include "test_util.h"

namespace reverb {
namespace {

using testing::batched;
using testing::random_signs;
using testing::random_sparse;
using testing::random_tensor;

struct Outcome {
  bool pass = true;
  std::string first_failure;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      first_failure = what;
      pass = false;
    }
  }
};

Outcome energy_table() {
  Outcome o;
  const double vanilla = estimate_energy(3.54e6, 71.20e6).energy_joules * 1e6;
  const double reverb = estimate_energy(3.54e6, 74.50e6).energy_joules * 1e6;
  o.require(std::abs(vanilla - 49.73) <= 0.01, "vanilla row");
  o.require(std::abs(reverb - 49.99) <= 0.01, "reverb row");
  o.detail << "vanilla " << vanilla << " uJ, reverb " << reverb << " uJ";
  return o;
}

Network random_alpha_network(const std::string& arch, double v_th,
                             std::uint64_t seed, std::mt19937_64& rng) {
  NetworkOptions opts;
  opts.v_th = v_th;
  opts.seed = seed;
  const Shape in = arch == "mlp-small" ? Shape{64} : Shape{1, 8, 8};
  Network net = build_architecture(arch, in, 10, opts);
  std::uniform_real_distribution<double> a(0.25, 2.0);
  for (BinaryLayer& l : net.layers) {
    if (!l.binarize) continue;
    for (double& v : l.alpha) v = a(rng);
  }
  return net;
}

Outcome reparam_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20);
  double worst = 0.0;
  for (const std::string arch : {"mlp-small", "convnet-small"}) {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      for (double v_th : {0.0, 0.25}) {
        const Network net = random_alpha_network(arch, v_th, seed, rng);
        const Tensor probes = random_tensor(batched(100, net.input_shape), rng, 0, 1);
        const EquivalenceReport r = verify_equivalence(net, fold_alpha(net), probes, 2);
        worst = std::max(worst, r.max_rel_diff);
        o.require(r.max_rel_diff <= 1e-9, arch + " relative difference");
        o.require(r.max_abs_output > 0.0, arch + " silent network");
      }
    }
    Network net = random_alpha_network(arch, 0.0, 3, rng);
    for (BinaryLayer& l : net.layers) {
      for (std::size_t c = 0; c < l.alpha.size(); ++c) {
        if (l.binarize) l.alpha[c] = std::ldexp(1.0, static_cast<int>(c % 4) - 2);
      }
    }
    const Tensor probes = random_tensor(batched(100, net.input_shape), rng, 0, 1);
    o.require(verify_equivalence(net, fold_alpha(net), probes, 2).bitwise_equal,
              arch + " dyadic bitwise");
  }
  o.detail << "max relative difference " << worst << " over 12 configurations";
  return o;
}

Outcome gradient_oracle() {
  Outcome o;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    GradcheckOptions g;
    g.seed = seed;
    const GradcheckReport r = run_gradcheck(g);
    worst = std::max(worst, r.max_rel_error());
    checked += r.checked;
    o.require(r.passed, "seed " + std::to_string(seed));
  }
  GradcheckOptions bad;
  bad.corrupt = [](NetworkGrads& g) { g.layers[1].w[0] += 0.5; };
  o.require(!run_gradcheck(bad).passed, "corrupted gradient not detected");
  o.detail << "max relative error " << worst << " over " << checked << " parameters";
  return o;
}

Outcome addition_only_kernel() {
  Outcome o;
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  std::uint64_t multiplications = 0;
  std::uint64_t additions = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    BinaryLayer layer;
    layer.binarize = true;
    Tensor x;
    Tensor reference;
    if (trial % 2 == 0) {
      layer.w_latent = random_signs({24, 48}, rng);
      x = random_sparse({48}, density(rng), rng, 0.0, 3.0);
      reference = matmul(layer.w_latent, x.reshaped({48, 1})).reshaped({24});
    } else {
      layer.kind = LayerKind::kConv;
      layer.w_latent = random_signs({6, 4, 3, 3}, rng);
      layer.stride = 1 + static_cast<std::size_t>(trial % 3 == 0);
      layer.padding = 1;
      x = random_sparse({4, 7, 7}, density(rng), rng, 0.0, 3.0);
      reference = conv2d(x, layer.w_latent, layer.stride, layer.padding);
    }
    layer.alpha.assign(layer.w_latent.dim(0), 1.0);
    const EventList events = make_event_list(x.data(), x.shape(), 0, 0);
    o.require(bitwise_equal(addition_only_forward(layer, events), reference),
              "trial " + std::to_string(trial));
    OpAuditValue::reset();
    accumulate_signed_events<OpAuditValue>(SignTable(layer, x.shape()), events);
    multiplications += OpAuditValue::counts().multiplications;
    additions += OpAuditValue::counts().additions;
  }
  o.require(multiplications == 0, "multiplications on the binarized path");
  o.detail << "1000 inputs bitwise equal, " << additions << " additions, "
           << multiplications << " multiplications";
  return o;
}

double final_train_accuracy(const DatasetSplits& data, TrainMode mode,
                            std::size_t timesteps, std::uint64_t seed, double lr) {
  NetworkOptions n;
  n.mode = mode;
  n.seed = seed;
  n.timesteps = timesteps;
  TrainConfig c;
  c.seed = seed;
  c.lr0 = lr;
  Dataset train_set = data.train;
  train_set.x = train_set.x.reshaped({train_set.size(), 64});
  try {
    return train(build_architecture("mlp-small", {64}, 10, n), train_set, c)
        .metrics.back()
        .accuracy;
  } catch (const TrainingError&) {
    return 0.0;
  }
}

Outcome directional_ablation() {
  Outcome o;
  const std::string digits = std::string(REVERB_TEST_DATA_DIR) + "/digits";
  const DatasetSplits data = load_dataset(digits, 0);
  const TrainMode modes[] = {TrainMode::kReverbLearnable, TrainMode::kReverb,
                             TrainMode::kVanilla};
  for (std::size_t timesteps : {2u, 4u}) {
    int ordered = 0;
    o.detail << "T=" << timesteps << ":";
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      double acc[3] = {0, 0, 0};
      for (int m = 0; m < 3; ++m) {
        for (double lr : {0.01, 0.02, 0.05, 0.1}) {
          acc[m] = std::max(acc[m], final_train_accuracy(data, modes[m], timesteps, seed, lr));
        }
      }
      const bool ok = acc[0] >= acc[1] && acc[1] >= acc[2];
      ordered += ok;
      char buf[96];
      std::snprintf(buf, sizeof buf, " seed%llu %.4f/%.4f/%.4f%s",
                    static_cast<unsigned long long>(seed), acc[0], acc[1], acc[2],
                    ok ? "" : "*");
      o.detail << buf;
    }
    o.require(ordered >= 2, "majority ordering at T=" + std::to_string(timesteps));
    o.detail << " (" << ordered << "/3 ordered); ";
  }
  o.detail << "columns learnable/reverb/vanilla";
  return o;
}

Outcome firing_invariants() {
  Outcome o;
  NeuronParams p;
  p.v_th = 0.5;
  p.tau = 0.25;
  LifState s = resting_state({1, 3});
  s = membrane_update(s, Tensor::matrix({{0.5, 0.4999, 2.0}}), p);
  const FireResult f = fire(s, p);
  o.require(f.spikes == Tensor::matrix({{0.5, 0.0, 2.0}}), "inclusive threshold");
  o.require(f.state.u == Tensor::matrix({{0.0, 0.4999, 0.0}}), "hard reset");
  const LifState next = membrane_update(f.state, Tensor({1, 3}), p);
  o.require(next.u == Tensor::matrix({{0.0, 0.4999 * 0.25, 0.0}}), "leak after reset");

  std::mt19937_64 rng(60);
  BinaryLayer layer;
  layer.binarize = true;
  layer.w_latent = random_signs({5, 12}, rng);
  layer.alpha.assign(5, 1.0);
  const Tensor x = random_sparse({12}, 0.5, rng, 0.1, 1.0);
  const EventList events = make_event_list(x.data(), {12}, 0, 0);
  o.require(events.events.size() < x.size(), "sample has silent neurons");
  const Tensor from_events = addition_only_forward(layer, events);
  o.require(bitwise_equal(from_events, matmul(layer.w_latent, x.reshaped({12, 1})).reshaped({5})),
            "silent neurons contribute nothing");

  const Tensor w = random_tensor({7, 9}, rng);
  const Tensor b = binarize_weights(w);
  o.require(binarize_weights(b) == b, "binarize idempotence");
  for (double c : {1e-3, 0.5, 3.0, 1e6}) {
    o.require(binarize_weights(scale(w, c)) == b, "sign scale invariance");
  }
  o.require(cosine_lr(0, 50, 0.1) == 0.1, "cosine start");
  o.require(std::abs(cosine_lr(50, 50, 0.1)) <= 1e-18, "cosine end");
  o.detail << "threshold, reset, silence, binarize and schedule checks";
  return o;
}

Outcome checkpoint_round_trip() {
  Outcome o;
  for (const std::string arch : {"mlp-small", "convnet-small"}) {
    NetworkOptions n;
    n.affine = true;
    n.seed = 70;
    const Shape in = arch == "mlp-small" ? Shape{64} : Shape{1, 8, 8};
    const Network net = build_architecture(arch, in, 10, n);
    const std::vector<std::uint8_t> trained = encode_checkpoint(net);
    const Checkpoint t = decode_checkpoint(trained);
    o.require(same_parameters(t.net, net) && encode_checkpoint(t.net) == trained,
              arch + " trained form");

    const InferenceNetwork inf = fold_alpha(net);
    const std::vector<std::uint8_t> packed = encode_checkpoint(inf);
    const Checkpoint i = decode_checkpoint(packed);
    o.require(i.form == CheckpointForm::kInference, arch + " form flag");
    o.require(same_parameters(i.net, inf.net) &&
                  encode_checkpoint(InferenceNetwork{i.net}) == packed,
              arch + " inference form");
    std::size_t saved = 0;
    for (const BinaryLayer& l : inf.net.layers) {
      if (!l.binarize) continue;
      for (double v : l.w_latent.data()) o.require(v == 1.0 || v == -1.0, "non-sign weight");
      saved += 8 * (l.w_latent.size() + l.alpha.size()) - ((l.w_latent.size() + 7) / 8 + 4);
    }
    o.require(encode_checkpoint(inf.net).size() - packed.size() == saved,
              arch + " payload is one bit per binarized weight");
  }
  o.detail << "both forms byte-identical after decode and re-encode";
  return o;
}

}  // namespace
}  // namespace reverb

int main() {
  using namespace reverb;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"energy table", energy_table},
      {"re-parameterization equivalence", reparam_equivalence},
      {"gradient oracle", gradient_oracle},
      {"addition-only kernel", addition_only_kernel},
      {"directional ablation", directional_ablation},
      {"firing and reset invariants", firing_invariants},
      {"checkpoint round trip", checkpoint_round_trip},
  };
  int failed = 0;
  int index = 1;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string detail = o.detail.str();
    if (!o.pass) detail += " (first failure: " + o.first_failure + ")";
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, c.name,
                detail.c_str(), seconds);
    std::fflush(stdout);
    failed += !o.pass;
    ++index;
  }
  return failed ? 1 : 0;
}
