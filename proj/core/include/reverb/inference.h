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

#ifndef REVERB_INFERENCE_H_
#define REVERB_INFERENCE_H_

#include <cstddef>
#include <cstdint>

#include "reverb/energy.h"
#include "reverb/reparam.h"
#include "reverb/trainer.h"

namespace reverb {

struct EventInferenceResult {
  Tensor o_out;  // [N, classes], time-averaged
  SpikeRecords records;
  std::uint64_t sops = 0;  // accumulates actually performed on hidden layers
  double flops = 0.0;      // multiply-accumulates in the real-valued layers
};

// Sample-by-sample event-driven evaluation. Hidden layers run on the
// addition-only kernels: sign weights take real spikes, real weights take
// binary spikes. Outputs are bit-identical to forward_pass on the same
// network.
EventInferenceResult run_event_inference(const InferenceNetwork& inference,
                                         const Tensor& batch,
                                         std::size_t timesteps);

// Spike statistics of a dense forward pass.
SpikeRecords record_spikes(const Network& net, const ForwardCache& cache);

}  // namespace reverb

#endif  // REVERB_INFERENCE_H_
