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

#include "reverb/neuron.h"

#include <cmath>
#include <string>

namespace reverb {

std::string_view fire_mode_name(FireMode mode) {
  switch (mode) {
    case FireMode::kBinary:
      return "binary";
    case FireMode::kReal:
      return "real";
    case FireMode::kScaledReal:
      return "scaled-real";
  }
  return "?";
}

void NeuronParams::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ModeError("tau must lie in [0, 1], got " + std::to_string(tau));
  }
  if (!std::isfinite(v_th)) throw ModeError("v_th must be finite");
  for (double a : scale) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw ModeError("firing scale entries must be strictly positive");
    }
  }
  if (!channel_v_th.empty() && mode == FireMode::kScaledReal &&
      channel_v_th.size() != scale.size()) {
    throw DimensionError("per-channel threshold length differs from scale");
  }
}

std::size_t channel_count(const Shape& shape) {
  if (shape.empty()) return 0;
  return shape.size() == 1 ? shape[0] : shape[1];
}

std::size_t channel_of(std::size_t flat_index, const Shape& shape) {
  if (shape.size() == 1) return flat_index;
  std::size_t inner = 1;
  for (std::size_t a = 2; a < shape.size(); ++a) inner *= shape[a];
  return (flat_index / inner) % shape[1];
}

LifState resting_state(const Shape& shape) { return LifState{Tensor(shape), 0}; }

LifState membrane_update(const LifState& state, const Tensor& current,
                         const NeuronParams& params) {
  if (state.u.shape() != current.shape()) {
    throw DimensionError("membrane_update: potential " +
                         shape_string(state.u.shape()) + " vs current " +
                         shape_string(current.shape()));
  }
  LifState next{Tensor(current.shape()), state.t + 1};
  auto u = next.u.data();
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = params.tau * state.u[i] + current[i];
  }
  next.u.check_finite("membrane_update");
  return next;
}

namespace {

void check_thresholds(const Shape& shape, const NeuronParams& params) {
  if (!params.channel_v_th.empty() &&
      params.channel_v_th.size() != channel_count(shape)) {
    throw DimensionError("per-channel threshold length " +
                         std::to_string(params.channel_v_th.size()) +
                         " does not match " + std::to_string(channel_count(shape)) +
                         " channels");
  }
}

// Shared gate/reset loop; `emit(value, channel)` gives the spike magnitude.
template <typename Emit>
FireResult gate_and_reset(const LifState& state, const NeuronParams& params,
                          Emit emit) {
  const Shape& shape = state.u.shape();
  check_thresholds(shape, params);
  FireResult r{Tensor(shape), LifState{state.u, state.t}, Tensor(shape)};
  auto u = r.state.u.data();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const std::size_t c = channel_of(i, shape);
    if (u[i] >= params.threshold(c)) {
      r.spikes[i] = emit(u[i], c);
      r.fired[i] = 1.0;
      u[i] = 0.0;
    }
  }
  return r;
}

void require_mode(const NeuronParams& params, FireMode mode, const char* op) {
  if (params.mode != mode) {
    throw ModeError(std::string(op) + " called with mode " +
                    std::string(fire_mode_name(params.mode)));
  }
}

}  // namespace

FireResult fire_binary(const LifState& state, const NeuronParams& params) {
  require_mode(params, FireMode::kBinary, "fire_binary");
  return gate_and_reset(state, params, [](double, std::size_t) { return 1.0; });
}

FireResult fire_real(const LifState& state, const NeuronParams& params) {
  require_mode(params, FireMode::kReal, "fire_real");
  return gate_and_reset(state, params, [](double u, std::size_t) { return u; });
}

FireResult fire_real_scaled(const LifState& state, const NeuronParams& params) {
  require_mode(params, FireMode::kScaledReal, "fire_real_scaled");
  if (params.scale.size() != channel_count(state.u.shape())) {
    throw DimensionError("firing scale has " +
                         std::to_string(params.scale.size()) +
                         " entries for " +
                         std::to_string(channel_count(state.u.shape())) +
                         " channels");
  }
  FireResult r = gate_and_reset(state, params, [&](double u, std::size_t c) {
    return params.scale[c] * u;
  });
  r.spikes.check_finite("fire_real_scaled");
  return r;
}

FireResult fire(const LifState& state, const NeuronParams& params) {
  switch (params.mode) {
    case FireMode::kBinary:
      return fire_binary(state, params);
    case FireMode::kReal:
      return fire_real(state, params);
    case FireMode::kScaledReal:
      return fire_real_scaled(state, params);
  }
  throw ModeError("unknown fire mode");
}

Tensor fire_backward(const Tensor& u, const NeuronParams& params) {
  const Shape& shape = u.shape();
  check_thresholds(shape, params);
  if (params.mode == FireMode::kScaledReal &&
      params.scale.size() != channel_count(shape)) {
    throw DimensionError("fire_backward: scale/channel length mismatch");
  }
  Tensor g(shape);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const std::size_t c = channel_of(i, shape);
    const double th = params.threshold(c);
    switch (params.mode) {
      case FireMode::kBinary:
        g[i] = std::abs(u[i] - th) <= 0.5 ? 1.0 : 0.0;
        break;
      case FireMode::kReal:
        g[i] = u[i] >= th ? 1.0 : 0.0;
        break;
      case FireMode::kScaledReal:
        g[i] = u[i] >= th ? params.scale[c] : 0.0;
        break;
    }
  }
  return g;
}

}  // namespace reverb
