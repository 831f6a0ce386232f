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

#include "reverb/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace reverb {

namespace {

struct Probe {
  double loss = 0.0;
  std::vector<Tensor> gates;
};

Probe probe(const Network& net, const Tensor& x, const std::vector<int>& labels,
            std::size_t timesteps) {
  const ForwardCache cache = forward_pass(net, x, timesteps);
  Probe p;
  p.loss = ce_loss(aggregate_output(cache.outputs), labels);
  for (const auto& step : cache.steps) {
    for (const LayerStep& s : step) {
      if (!s.fired.empty()) p.gates.push_back(s.fired);
    }
  }
  return p;
}

NetworkGrads analytic(const Network& net, const Tensor& x,
                      const std::vector<int>& labels, std::size_t timesteps) {
  const ForwardCache cache = forward_pass(net, x, timesteps);
  const Tensor grad = ce_loss_grad(aggregate_output(cache.outputs), labels);
  return backward_stbp(net, cache, grad);
}

bool near_boundary(double w, double margin) {
  const double a = std::abs(w);
  return a < margin || std::abs(a - 1.0) < margin;
}

// Central difference of the loss in the parameter `param` points at. Returns
// false when either perturbation flips a firing gate.
bool central_difference(Network& net, double& param, const Tensor& x,
                        const std::vector<int>& labels,
                        const GradcheckOptions& o, const Probe& base,
                        double& out) {
  const double saved = param;
  param = saved + o.step;
  const Probe plus = probe(net, x, labels, o.timesteps);
  param = saved - o.step;
  const Probe minus = probe(net, x, labels, o.timesteps);
  param = saved;
  if (plus.gates != base.gates || minus.gates != base.gates) return false;
  out = (plus.loss - minus.loss) / (2.0 * o.step);
  return true;
}

void check_alpha(Network net, const Tensor& x, const std::vector<int>& labels,
                 const GradcheckOptions& o, GradcheckReport& report) {
  NetworkGrads grads = analytic(net, x, labels, o.timesteps);
  if (o.corrupt) o.corrupt(grads);
  const Probe base = probe(net, x, labels, o.timesteps);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!net.layers[l].binarize || !net.layers[l].learn_alpha) continue;
    for (std::size_t c = 0; c < net.layers[l].alpha.size(); ++c) {
      double numeric = 0.0;
      if (!central_difference(net, net.layers[l].alpha[c], x, labels, o, base,
                              numeric)) {
        ++report.skipped_gate_flips;
        continue;
      }
      report.max_rel_error_alpha =
          std::max(report.max_rel_error_alpha,
                   relative_error(grads.layers[l].alpha[c], numeric));
      ++report.checked;
    }
  }
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-7) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradcheckReport check_gradients(const Network& net, const Tensor& x,
                                const std::vector<int>& labels,
                                const GradcheckOptions& options) {
  GradcheckReport report;
  Network surrogate = net;
  surrogate.transform = WeightTransform::kClippedIdentity;

  NetworkGrads grads = analytic(surrogate, x, labels, options.timesteps);
  if (options.corrupt) options.corrupt(grads);
  const Probe base = probe(surrogate, x, labels, options.timesteps);
  for (std::size_t l = 0; l < surrogate.layers.size(); ++l) {
    BinaryLayer& layer = surrogate.layers[l];
    for (std::size_t i = 0; i < layer.w_latent.size(); ++i) {
      if (layer.binarize && near_boundary(layer.w_latent[i], options.boundary)) {
        ++report.skipped_boundary;
        continue;
      }
      double numeric = 0.0;
      if (!central_difference(surrogate, layer.w_latent[i], x, labels, options,
                              base, numeric)) {
        ++report.skipped_gate_flips;
        continue;
      }
      report.max_rel_error_w = std::max(
          report.max_rel_error_w, relative_error(grads.layers[l].w[i], numeric));
      ++report.checked;
    }
  }

  check_alpha(surrogate, x, labels, options, report);
  Network sign = net;
  sign.transform = WeightTransform::kSign;
  check_alpha(sign, x, labels, options, report);

  report.passed = report.checked > 0 &&
                  report.max_rel_error() <= options.tolerance;
  return report;
}

Network gradcheck_network(const GradcheckOptions& options) {
  NetworkOptions n;
  n.mode = TrainMode::kReverbLearnable;
  n.tau = options.tau;
  n.v_th = options.v_th;
  n.timesteps = options.timesteps;
  n.seed = options.seed;
  return build_network({4}, {LayerPlan{LayerKind::kDense, 8},
                             LayerPlan{LayerKind::kDense, 8}},
                       3, n);
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  const Network net = gradcheck_network(options);
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, 2);
  std::vector<double> data(options.batch * 4);
  for (double& v : data) v = value(rng);
  std::vector<int> labels(options.batch);
  for (int& y : labels) y = label(rng);
  return check_gradients(net, Tensor({options.batch, 4}, std::move(data)),
                         labels, options);
}

}  // namespace reverb
