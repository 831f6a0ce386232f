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

#ifndef REVERB_TENSOR_H_
#define REVERB_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "reverb/errors.h"

namespace reverb {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Thrown when an operation would produce NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Dense row-major array of doubles. Every dimension is positive and every
// element is finite once an operation has returned.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor.
  explicit Tensor(Shape shape);
  // Takes ownership of `data`; throws DimensionError on size mismatch and
  // NumericError on non-finite input.
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor identity(std::size_t n);
  // 2-D convenience constructor, rows must all have equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }

  // Same data, new shape of equal element count.
  Tensor reshaped(Shape shape) const;
  // Row `i` of the leading axis as its own tensor.
  Tensor slice0(std::size_t i) const;
  void set_slice0(std::size_t i, const Tensor& value);

  bool all_finite() const;
  void check_finite(const char* where) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// True when shapes match and every element has the identical bit pattern.
bool bitwise_equal(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);

// Elementwise arithmetic; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
void add_inplace(Tensor& acc, const Tensor& b);

double sum(const Tensor& a);
Tensor transpose(const Tensor& a);

// [m x k] * [k x n]. Each output element is accumulated from 0.0 in
// ascending k order.
Tensor matmul(const Tensor& a, const Tensor& b);

std::size_t conv_output_size(std::size_t input, std::size_t kernel,
                             std::size_t stride, std::size_t padding);

// Zero-padded cross-correlation of input [C_in, H, W] with kernels
// [C_out, C_in, k, k]. Each output element is accumulated in ascending
// (c_in, ky, kx) order; taps that land in the padding are skipped.
Tensor conv2d(const Tensor& input, const Tensor& kernels, std::size_t stride,
              std::size_t padding);

// Gradient of conv2d w.r.t. its input, given the output gradient.
Tensor conv2d_backward_input(const Tensor& grad_out, const Tensor& kernels,
                             const Shape& input_shape, std::size_t stride,
                             std::size_t padding);

// Gradient of conv2d w.r.t. its kernels, given the output gradient.
Tensor conv2d_backward_kernels(const Tensor& grad_out, const Tensor& input,
                               const Shape& kernel_shape, std::size_t stride,
                               std::size_t padding);

}  // namespace reverb

#endif  // REVERB_TENSOR_H_
