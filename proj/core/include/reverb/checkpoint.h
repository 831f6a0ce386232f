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

// Binary checkpoint format (all integers little-endian, reals IEEE-754
// binary64 bit patterns):
//
//   "RVRB" | u32 version | u32 flags (bit 0: inference form)
//   u8 mode | u8 weight transform | u32 timesteps
//   u32 input rank | u32 dims...
//   u32 layer count, then per layer:
//     u8 kind | u8 binarize | u8 learn_alpha | u8 has_affine
//     u32 weight rank | u32 dims... | u32 stride | u32 padding
//   per neuron (layer count - 1):
//     f64 tau | f64 v_th | u8 fire mode
//     u32 n | f64 scale[n] | u32 m | f64 channel_v_th[m]
//   per layer payload:
//     inference form, binarized: u32 byte count | sign bits, 8 per byte,
//                                LSB first, 1 = +1 (alpha is implied 1)
//     otherwise:                 f64 weights[...] | f64 alpha[out]
//     has_affine:                f64 gamma[out] | f64 beta[out]

#ifndef REVERB_CHECKPOINT_H_
#define REVERB_CHECKPOINT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reverb/network.h"
#include "reverb/reparam.h"

namespace reverb {

inline constexpr char kCheckpointMagic[4] = {'R', 'V', 'R', 'B'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointForm : std::uint32_t { kTrained = 0, kInference = 1 };

std::vector<std::uint8_t> encode_checkpoint(const Network& net);
std::vector<std::uint8_t> encode_checkpoint(const InferenceNetwork& inference);

struct Checkpoint {
  CheckpointForm form = CheckpointForm::kTrained;
  Network net;
};

// Throws ParseError with the byte offset of the first malformed field.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

// Written through a temporary file and renamed into place.
void save_checkpoint(const std::string& path, const Network& net);
void save_checkpoint(const std::string& path, const InferenceNetwork& inference);
Checkpoint load_checkpoint(const std::string& path);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

}  // namespace reverb

#endif  // REVERB_CHECKPOINT_H_
