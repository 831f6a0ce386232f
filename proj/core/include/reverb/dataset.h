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

// Dataset ingestion. Three sources are understood:
//
//   synthetic:two-gaussians   built-in separable 2-class set
//   <dir> with IDX files      train-images-idx3-ubyte / train-labels-idx1-ubyte
//                             (+ t10k-* test pair), big-endian headers
//   <dir> of per-class CSVs   <name>.csv, one sample per row; classes are the
//                             sorted file stems. Optional train/ and test/
//                             subdirectories give explicit splits.
//
// Values are scaled into [0, 1].

#ifndef REVERB_DATASET_H_
#define REVERB_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reverb/tensor.h"

namespace reverb {

struct Dataset {
  Tensor x;  // [N, ...sample shape]
  std::vector<int> y;
  std::size_t num_classes = 0;

  std::size_t size() const { return y.size(); }
  Shape sample_shape() const { return Shape(x.shape().begin() + 1, x.shape().end()); }
  // Rows `indices` in the given order.
  Dataset gather(std::span<const std::size_t> indices) const;
};

struct DatasetSplits {
  Dataset train;
  Dataset test;
};

// `seed` fixes the shuffle used for splits that the source does not define.
DatasetSplits load_dataset(const std::string& path, std::uint64_t seed);

Dataset make_two_gaussians(std::size_t count, std::size_t features,
                           std::uint64_t seed);

// Parsers exposed for tests; both throw ParseError carrying a byte offset.
Tensor parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

}  // namespace reverb

#endif  // REVERB_DATASET_H_
