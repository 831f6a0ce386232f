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

#ifndef REVERB_TESTS_TEST_UTIL_H_
#define REVERB_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <vector>

#include "reverb/tensor.h"

namespace reverb::testing {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = d(rng);
  return Tensor(shape, std::move(v));
}

// Entries are zero with probability `density` complement, else U(lo, hi).
inline Tensor random_sparse(const Shape& shape, double density,
                            std::mt19937_64& rng, double lo = 0.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(shape_size(shape), 0.0);
  for (double& x : v) {
    if (keep(rng) < density) x = d(rng);
  }
  return Tensor(shape, std::move(v));
}

inline Tensor random_signs(const Shape& shape, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = coin(rng) ? 1.0 : -1.0;
  return Tensor(shape, std::move(v));
}

inline Shape batched(std::size_t n, const Shape& sample) {
  Shape s{n};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

}  // namespace reverb::testing

#endif  // REVERB_TESTS_TEST_UTIL_H_
