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

#include "reverb/tensor.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_util.h"

namespace reverb {
namespace {

using testing::random_tensor;

Tensor triple_loop(const Tensor& a, const Tensor& b) {
  Tensor c({a.dim(0), b.dim(1)});
  for (std::size_t i = 0; i < a.dim(0); ++i) {
    for (std::size_t j = 0; j < b.dim(1); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.dim(1); ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  }
  return c;
}

Tensor six_loop(const Tensor& x, const Tensor& w, std::size_t stride,
                std::size_t pad) {
  const std::size_t ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t co = w.dim(0), k = w.dim(2);
  const std::size_t ho = (h + 2 * pad - k) / stride + 1;
  const std::size_t wo = (wd + 2 * pad - k) / stride + 1;
  Tensor out({co, ho, wo});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double s = 0.0;
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long y = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              const long xx = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
              if (y < 0 || xx < 0 || y >= static_cast<long>(h) || xx >= static_cast<long>(wd)) continue;
              s += x[(c * h + y) * wd + xx] * w[((o * ci + c) * k + ky) * k + kx];
            }
        out[(o * ho + oy) * wo + ox] = s;
      }
  return out;
}

TEST(Tensor, RejectsSizeMismatchAndNonFinite) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  EXPECT_THROW(Tensor({1}, {std::numeric_limits<double>::quiet_NaN()}),
               NumericError);
  EXPECT_THROW(Tensor({2}, {1.0, std::numeric_limits<double>::infinity()}),
               NumericError);
}

TEST(Tensor, ReshapeKeepsData) {
  const Tensor t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor r = t.reshaped({3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshaped({4, 2}), DimensionError);
}

TEST(Matmul, IdentityRight) {
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(a, Tensor::identity(2)), a);
}

TEST(Matmul, IdentityLeft) {
  const Tensor b = Tensor::matrix({{5}, {7}});
  EXPECT_EQ(matmul(Tensor::matrix({{1, 0}, {0, 1}}), b), b);
}

TEST(Matmul, MatchesTripleLoop) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_tensor({3, 4}, rng);
    const Tensor b = random_tensor({4, 2}, rng);
    EXPECT_TRUE(bitwise_equal(matmul(a, b), triple_loop(a, b)));
  }
}

TEST(Matmul, ShapeMismatch) {
  EXPECT_THROW(matmul(Tensor({2, 3}), Tensor({2, 3})), DimensionError);
}

TEST(Conv2d, ZeroKernels) {
  std::mt19937_64 rng(1);
  const Tensor out = conv2d(random_tensor({2, 5, 5}, rng), Tensor({3, 2, 3, 3}), 1, 1);
  EXPECT_EQ(max_abs(out), 0.0);
}

TEST(Conv2d, UnitKernelSumsChannels) {
  std::mt19937_64 rng(2);
  const Tensor x = random_tensor({3, 4, 4}, rng);
  const Tensor out = conv2d(x, Tensor::full({1, 3, 1, 1}, 1.0), 1, 0);
  ASSERT_EQ(out.shape(), (Shape{1, 4, 4}));
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_DOUBLE_EQ(out[i], x[i] + x[16 + i] + x[32 + i]);
  }
}

TEST(Conv2d, MatchesSixLoop) {
  std::mt19937_64 rng(3);
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t pad : {0u, 1u, 2u}) {
      const Tensor x = random_tensor({2, 5, 5}, rng);
      const Tensor w = random_tensor({3, 2, 3, 3}, rng);
      EXPECT_LE(max_abs_diff(conv2d(x, w, stride, pad), six_loop(x, w, stride, pad)),
                1e-12);
    }
  }
}

TEST(Conv2d, KernelLargerThanPaddedInput) {
  EXPECT_THROW(conv2d(Tensor({1, 2, 2}), Tensor({1, 1, 5, 5}), 1, 1),
               DimensionError);
  EXPECT_THROW(conv_output_size(4, 3, 0, 0), DimensionError);
}

TEST(Conv2d, OutputShapeGrid) {
  for (std::size_t h = 3; h <= 9; ++h)
    for (std::size_t k = 1; k <= 3; ++k)
      for (std::size_t s = 1; s <= 3; ++s)
        for (std::size_t p = 0; p <= 2; ++p) {
          const Tensor out = conv2d(Tensor::full({1, h, h + 1}, 1.0),
                                    Tensor::full({2, 1, k, k}, 1.0), s, p);
          EXPECT_EQ(out.shape(),
                    (Shape{2, (h + 2 * p - k) / s + 1, (h + 1 + 2 * p - k) / s + 1}));
        }
}

// <conv(x), g> == <x, conv_backward_input(g)> and likewise for kernels.
TEST(Conv2d, BackwardIsAdjoint) {
  std::mt19937_64 rng(4);
  for (std::size_t stride : {1u, 2u}) {
    const Tensor x = random_tensor({2, 6, 6}, rng);
    const Tensor w = random_tensor({3, 2, 3, 3}, rng);
    const Tensor y = conv2d(x, w, stride, 1);
    const Tensor g = random_tensor(y.shape(), rng);
    const double lhs = sum(hadamard(y, g));
    const double via_input =
        sum(hadamard(x, conv2d_backward_input(g, w, x.shape(), stride, 1)));
    const double via_kernel =
        sum(hadamard(w, conv2d_backward_kernels(g, x, w.shape(), stride, 1)));
    EXPECT_NEAR(lhs, via_input, 1e-12);
    EXPECT_NEAR(lhs, via_kernel, 1e-12);
  }
}

TEST(Elementwise, ShapesMustMatch) {
  EXPECT_THROW(add(Tensor({2}), Tensor({3})), DimensionError);
  EXPECT_EQ(add(Tensor::vector({1, 2}), Tensor::vector({3, 4})), Tensor::vector({4, 6}));
  EXPECT_EQ(scale(Tensor::vector({1, -2}), 2.0), Tensor::vector({2, -4}));
  EXPECT_EQ(transpose(Tensor::matrix({{1, 2, 3}})), Tensor::matrix({{1}, {2}, {3}}));
}

}  // namespace
}  // namespace reverb
