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

// Moves the learned amplitude alpha out of binarized weights and into firing
// functions, so every binarized layer applies pure {-1, +1} weights.
//
// Layers are processed in ascending order. For binarized layer i:
//
//  * alpha_i uniform (a single value a): layer i-1 fires a * O instead of O.
//    Since the scale is applied after the gate, nothing else changes.
//
//  * alpha_i varies across output channels: it cannot be pushed through
//    sign(W) into the previous layer. Layer i keeps its membrane in units of
//    1/alpha_c instead, fires alpha_c * U' and gates at V_th / alpha_c, which
//    reproduces the original spikes exactly.

#ifndef REVERB_REPARAM_H_
#define REVERB_REPARAM_H_

#include <cstddef>

#include "reverb/network.h"
#include "reverb/tensor.h"

namespace reverb {

// A network whose binarized layers all have alpha == 1 and latent weights in
// {-1, +1}. The folded scales live in the neuron parameters.
struct InferenceNetwork {
  Network net;

  // Throws ModeError when a binarized layer is not in pure sign form.
  void validate() const;
};

// Throws FoldError naming the layer pair when alpha cannot be folded.
InferenceNetwork fold_alpha(const Network& net);

struct EquivalenceReport {
  double max_abs_diff = 0.0;
  // max_abs_diff divided by the largest |O_out| of the trained network.
  double max_rel_diff = 0.0;
  double max_abs_output = 0.0;
  bool bitwise_equal = false;
};

// Runs both networks on `probes` for `timesteps` steps and compares the
// time-averaged outputs.
EquivalenceReport verify_equivalence(const Network& net,
                                     const InferenceNetwork& inference,
                                     const Tensor& probes,
                                     std::size_t timesteps);

}  // namespace reverb

#endif  // REVERB_REPARAM_H_
