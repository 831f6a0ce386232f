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

// reverb: train, fold, evaluate and gradient-check ReverB networks.
//
// Exit codes: 0 ok, 1 other error, 2 parse or usage error, 3 I/O error,
// 4 dimension mismatch, 5 training failure, 6 mode error, 7 gradient check
// failed, 8 fold error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "reverb/checkpoint.h"
#include "reverb/dataset.h"
#include "reverb/energy.h"
#include "reverb/gradcheck.h"
#include "reverb/inference.h"
#include "reverb/reparam.h"
#include "reverb/run_config.h"
#include "reverb/trainer.h"

namespace {

using json = nlohmann::json;
using namespace reverb;

enum ExitCode {
  kOk = 0,
  kOther = 1,
  kParse = 2,
  kIo = 3,
  kDimension = 4,
  kTraining = 5,
  kMode = 6,
  kGradcheckFailed = 7,
  kFold = 8,
};

struct Flags {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::string metrics;
  std::string dataset;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> timesteps;
  std::optional<double> flops;
  std::optional<double> sops;
  bool plain_sparsity = false;
  bool corrupt_gradient = false;
};

class MetricsSink {
 public:
  explicit MetricsSink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::app);
    if (!file_) throw IoError("cannot open metrics file '" + path + "'");
  }
  void emit(const json& record) {
    std::ostream& out = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
    out << record.dump() << "\n";
    out.flush();
  }

 private:
  std::ofstream file_;
};

RunConfig resolve_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.timesteps) c.timesteps = *f.timesteps;
  if (!f.mode.empty()) c.mode = parse_train_mode(f.mode);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (c.timesteps == 0) throw ParseError("timesteps must be positive");
  return c;
}

// Flattens or validates samples so they fit the network input.
Dataset fit_to_input(Dataset d, const Shape& input) {
  if (d.size() == 0) return d;
  const Shape sample = d.sample_shape();
  if (sample == input) return d;
  if (shape_size(sample) != shape_size(input) || input.size() != 1) {
    throw DimensionError("dataset samples " + shape_string(sample) +
                         " do not fit network input " + shape_string(input));
  }
  d.x = d.x.reshaped({d.size(), shape_size(input)});
  return d;
}

Shape input_shape_for(const std::string& arch, const Shape& sample) {
  if (arch == "mlp-small") return {shape_size(sample)};
  if (sample.size() != 3) {
    throw DimensionError("convnet-small needs [C, H, W] samples, got " +
                         shape_string(sample));
  }
  return sample;
}

json energy_json(const EnergyReport& r) {
  return {{"flops", r.flops},
          {"sops", r.sops},
          {"sparsity", r.sparsity},
          {"layer_sparsity", r.layer_sparsity},
          {"timesteps", r.timesteps},
          {"energy_uj", r.energy_joules * 1e6}};
}

int cmd_train(const Flags& f) {
  if (f.out.empty()) throw ParseError("train needs --out");
  const RunConfig c = resolve_config(f);
  const DatasetSplits data = load_dataset(c.dataset, c.seed);
  const Shape input = input_shape_for(c.arch, data.train.sample_shape());
  const Dataset train_set = fit_to_input(data.train, input);
  Network net = build_architecture(c.arch, input, data.train.num_classes,
                                   c.network_options());
  MetricsSink sink(f.metrics);
  try {
    TrainResult result = train(std::move(net), train_set, c.train_config(),
                               [&](const EpochMetrics& m) {
                                 sink.emit({{"epoch", m.epoch},
                                            {"lr", m.lr},
                                            {"loss", m.loss},
                                            {"acc", m.accuracy}});
                               });
    save_checkpoint(f.out, result.net);
  } catch (const TrainingError&) {
    std::error_code ec;
    std::filesystem::remove(f.out, ec);
    std::filesystem::remove(f.out + ".tmp", ec);
    throw;
  }
  return kOk;
}

int cmd_reparam(const Flags& f) {
  if (f.checkpoint.empty() || f.out.empty()) {
    throw ParseError("reparam needs --checkpoint and --out");
  }
  const Checkpoint in = load_checkpoint(f.checkpoint);
  if (in.form == CheckpointForm::kInference) {
    throw ModeError("checkpoint '" + f.checkpoint + "' is already inference-form");
  }
  const InferenceNetwork inference = fold_alpha(in.net);
  Shape probe_shape{32};
  probe_shape.insert(probe_shape.end(), in.net.input_shape.begin(),
                     in.net.input_shape.end());
  Tensor probes(probe_shape);
  std::mt19937_64 rng(f.seed.value_or(0));
  std::uniform_real_distribution<double> value(0.0, 1.0);
  for (double& v : probes.data()) v = value(rng);
  const EquivalenceReport report =
      verify_equivalence(in.net, inference, probes, in.net.timesteps);
  save_checkpoint(f.out, inference);
  MetricsSink sink(f.metrics);
  sink.emit({{"probes", 32},
             {"max_abs_diff", report.max_abs_diff},
             {"max_rel_diff", report.max_rel_diff},
             {"bitwise_equal", report.bitwise_equal}});
  return kOk;
}

int cmd_eval(const Flags& f, bool with_accuracy) {
  if (!with_accuracy && f.flops && f.sops) {
    MetricsSink(f.metrics).emit(energy_json(estimate_energy(*f.flops, *f.sops)));
    return kOk;
  }
  if (f.checkpoint.empty()) throw ParseError("--checkpoint is required");
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const RunConfig c = resolve_config(f);
  const std::size_t timesteps = f.timesteps.value_or(ck.net.timesteps);
  const Dataset test = fit_to_input(load_dataset(c.dataset, c.seed).test,
                                    ck.net.input_shape);
  if (test.size() == 0) throw DimensionError("test split is empty");
  if (test.num_classes > ck.net.num_classes()) {
    throw DimensionError("dataset has more classes than the network outputs");
  }

  SpikeRecords records;
  std::size_t correct = 0;
  std::optional<std::uint64_t> measured_sops;
  constexpr std::size_t kBatch = 128;
  for (std::size_t start = 0; start < test.size(); start += kBatch) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(test.size(), start + kBatch); ++i) {
      idx.push_back(i);
    }
    const Dataset batch = test.gather(idx);
    Tensor out;
    if (ck.form == CheckpointForm::kInference) {
      EventInferenceResult r =
          run_event_inference(InferenceNetwork{ck.net}, batch.x, timesteps);
      out = std::move(r.o_out);
      records.merge(r.records);
      measured_sops = measured_sops.value_or(0) + r.sops;
    } else {
      const ForwardCache cache = forward_pass(ck.net, batch.x, timesteps);
      out = aggregate_output(cache.outputs);
      records.merge(record_spikes(ck.net, cache));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < out.dim(1); ++k) {
        if (out.at(i, k) > out.at(i, best)) best = k;
      }
      correct += static_cast<int>(best) == batch.y[i];
    }
  }
  if (ck.form == CheckpointForm::kTrained) {
    std::cerr << "warning: trained-form checkpoint evaluated on the dense path\n";
  }
  const EnergyReport energy = energy_report(
      ck.net, records,
      f.plain_sparsity ? SparsityWeighting::kPlain
                       : SparsityWeighting::kAdditionWeighted);
  json record = energy_json(energy);
  record["form"] = ck.form == CheckpointForm::kInference ? "inference" : "trained";
  record["samples"] = test.size();
  if (measured_sops) {
    record["measured_sops_per_sample"] =
        static_cast<double>(*measured_sops) / static_cast<double>(test.size());
  }
  if (with_accuracy) {
    record["accuracy"] =
        static_cast<double>(correct) / static_cast<double>(test.size());
  }
  MetricsSink(f.metrics).emit(record);
  return kOk;
}

int cmd_gradcheck(const Flags& f) {
  const RunConfig c = resolve_config(f);
  GradcheckOptions o;
  o.seed = c.seed;
  o.tau = c.tau;
  o.v_th = c.v_th;
  o.timesteps = 2;
  if (f.corrupt_gradient) {
    o.corrupt = [](NetworkGrads& g) {
      for (LayerGrads& l : g.layers) {
        for (double& v : l.w.data()) v = 1.5 * v + 1e-3;
      }
    };
  }
  const GradcheckReport r = run_gradcheck(o);
  MetricsSink(f.metrics).emit({{"passed", r.passed},
                               {"max_rel_error", r.max_rel_error()},
                               {"max_rel_error_w", r.max_rel_error_w},
                               {"max_rel_error_alpha", r.max_rel_error_alpha},
                               {"checked", r.checked},
                               {"skipped_gate_flips", r.skipped_gate_flips},
                               {"skipped_boundary", r.skipped_boundary}});
  return r.passed ? kOk : kGradcheckFailed;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return kParse;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const DimensionError*>(&e)) return kDimension;
  if (dynamic_cast<const TrainingError*>(&e)) return kTraining;
  if (dynamic_cast<const FoldError*>(&e)) return kFold;
  if (dynamic_cast<const ModeError*>(&e)) return kMode;
  return kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReverB spiking network trainer and inference tool"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", f.config, "Run configuration file");
    cmd->add_option("--seed", f.seed, "Random seed override");
    cmd->add_option("--mode", f.mode, "vanilla | reverb | reverb-learnable")
        ->check(CLI::IsMember({"vanilla", "reverb", "reverb-learnable"}));
    cmd->add_option("--timesteps", f.timesteps, "Timestep override");
    cmd->add_option("--dataset", f.dataset, "Dataset path override");
    cmd->add_option("--metrics", f.metrics, "Append JSON records to this file");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "Train a network");
  add_common(train_cmd);
  train_cmd->add_option("--out", f.out, "Checkpoint to write");

  CLI::App* reparam_cmd = app.add_subcommand("reparam", "Fold alpha into an inference-form checkpoint");
  add_common(reparam_cmd);
  reparam_cmd->add_option("--checkpoint", f.checkpoint, "Trained-form checkpoint");
  reparam_cmd->add_option("--out", f.out, "Inference-form checkpoint to write");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Accuracy and energy on the test split");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint to evaluate");
  eval_cmd->add_flag("--plain-sparsity", f.plain_sparsity, "Unweighted mean sparsity");

  CLI::App* energy_cmd = app.add_subcommand("energy", "Energy estimate without accuracy");
  add_common(energy_cmd);
  energy_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint to evaluate");
  energy_cmd->add_flag("--plain-sparsity", f.plain_sparsity, "Unweighted mean sparsity");
  energy_cmd->add_option("--flops", f.flops, "FLOP count")->check(CLI::NonNegativeNumber);
  energy_cmd->add_option("--sops", f.sops, "SOP count")->check(CLI::NonNegativeNumber);

  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_common(grad_cmd);
  grad_cmd->add_flag("--corrupt-gradient", f.corrupt_gradient, "Test hook: perturb analytic gradients")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*train_cmd) return cmd_train(f);
    if (*reparam_cmd) return cmd_reparam(f);
    if (*eval_cmd) return cmd_eval(f, true);
    if (*energy_cmd) return cmd_eval(f, false);
    if (*grad_cmd) return cmd_gradcheck(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOther;
}
