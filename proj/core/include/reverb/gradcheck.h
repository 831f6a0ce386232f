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

// Finite-difference oracle for the analytic STBP gradients. Latent weights
// are checked under the clipped-identity surrogate forward, whose derivative
// is exactly the straight-through estimate. Amplitudes are checked under both
// the surrogate and the sign forward.

#ifndef REVERB_GRADCHECK_H_
#define REVERB_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reverb/network.h"
#include "reverb/tensor.h"
#include "reverb/trainer.h"

namespace reverb {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  double tau = 0.25;
  double v_th = 0.0;
  std::size_t timesteps = 2;
  std::size_t batch = 6;
  double step = 1e-6;
  double tolerance = 1e-3;
  // Latent weights this close to 0 or +-1 are skipped.
  double boundary = 1e-4;
  // Test hook, applied to the analytic gradients before comparison.
  std::function<void(NetworkGrads&)> corrupt;
};

struct GradcheckReport {
  double max_rel_error_w = 0.0;
  double max_rel_error_alpha = 0.0;
  std::size_t checked = 0;
  // Parameters whose +-step perturbation flips a firing gate.
  std::size_t skipped_gate_flips = 0;
  std::size_t skipped_boundary = 0;
  bool passed = false;

  double max_rel_error() const {
    return max_rel_error_w > max_rel_error_alpha ? max_rel_error_w
                                                 : max_rel_error_alpha;
  }
};

// |a - n| / max(|a|, |n|); 0 when both are below 1e-7.
double relative_error(double analytic, double numeric);

// Checks every latent weight and every binarized amplitude of `net`.
GradcheckReport check_gradients(const Network& net, const Tensor& x,
                                const std::vector<int>& labels,
                                const GradcheckOptions& options);

// 4 inputs -> 8 (real) -> 8 (binarized) -> 3 classes, learned alpha.
Network gradcheck_network(const GradcheckOptions& options);

GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace reverb

#endif  // REVERB_GRADCHECK_H_
