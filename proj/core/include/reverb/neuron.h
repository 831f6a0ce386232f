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

// Leaky integrate-and-fire dynamics with three firing rules:
//
//   kBinary      O = 1            if U >= V_th, else 0
//   kReal        O = U            if U >= V_th, else 0
//   kScaledReal  O = alpha_c * U  if U >= V_th, else 0
//
// All rules hard-reset a fired neuron to 0. The membrane update is
// U[t] = tau * U_reset[t-1] + I[t].

#ifndef REVERB_NEURON_H_
#define REVERB_NEURON_H_

#include <cstddef>
#include <string_view>
#include <vector>

#include "reverb/tensor.h"

namespace reverb {

enum class FireMode { kBinary, kReal, kScaledReal };

std::string_view fire_mode_name(FireMode mode);

struct NeuronParams {
  double tau = 0.25;
  double v_th = 0.0;
  FireMode mode = FireMode::kReal;
  // Per-channel output scale, only read in kScaledReal.
  std::vector<double> scale;
  // Optional per-channel gate threshold overriding v_th. Set by the
  // re-parameterization when a layer's membrane is rescaled.
  std::vector<double> channel_v_th;

  // Throws ModeError on tau outside [0, 1] or non-positive scale entries.
  void validate() const;
  double threshold(std::size_t channel) const {
    return channel_v_th.empty() ? v_th : channel_v_th[channel];
  }

  friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

// Channels live on axis 0 for rank-1 tensors and on axis 1 otherwise
// ([N, F] or [N, C, H, W]).
std::size_t channel_count(const Shape& shape);
std::size_t channel_of(std::size_t flat_index, const Shape& shape);

struct LifState {
  Tensor u;
  int t = 0;
};

LifState resting_state(const Shape& shape);

LifState membrane_update(const LifState& state, const Tensor& current,
                         const NeuronParams& params);

struct FireResult {
  Tensor spikes;
  LifState state;
  // 1 where the gate passed (and the neuron was reset), 0 elsewhere.
  Tensor fired;
};

FireResult fire_binary(const LifState& state, const NeuronParams& params);
FireResult fire_real(const LifState& state, const NeuronParams& params);
FireResult fire_real_scaled(const LifState& state, const NeuronParams& params);
// Dispatches on params.mode.
FireResult fire(const LifState& state, const NeuronParams& params);

// dO/dU for the configured rule. kReal and kScaledReal drop the Dirac term at
// the gate; kBinary uses a unit rectangular window of width 1 around V_th.
Tensor fire_backward(const Tensor& u, const NeuronParams& params);

}  // namespace reverb

#endif  // REVERB_NEURON_H_
