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

// Plain-text run configuration, one `key = value` per line, `#` starts a
// comment. Recognised keys:
//
//   dataset   path or synthetic:two-gaussians
//   arch      mlp-small | convnet-small
//   T         timesteps
//   tau, v_th
//   mode      vanilla | reverb | reverb-learnable
//   epochs, batch, lr0, momentum, seed
//   affine    true | false
//
// Unknown keys and repeated keys are rejected.

#ifndef REVERB_RUN_CONFIG_H_
#define REVERB_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "reverb/network.h"
#include "reverb/trainer.h"

namespace reverb {

struct RunConfig {
  std::string dataset = "synthetic:two-gaussians";
  std::string arch = "mlp-small";
  std::size_t timesteps = 2;
  double tau = 0.25;
  double v_th = 0.0;
  TrainMode mode = TrainMode::kReverbLearnable;
  int epochs = 10;
  std::size_t batch = 32;
  double lr0 = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool affine = false;

  TrainConfig train_config() const;
  NetworkOptions network_options() const;
  std::string to_text() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ParseError with the byte offset of the offending line.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

}  // namespace reverb

#endif  // REVERB_RUN_CONFIG_H_
