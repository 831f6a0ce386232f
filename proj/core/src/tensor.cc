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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace reverb {

std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_positive(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw DimensionError("zero-sized dimension in shape " +
                           shape_string(shape));
    }
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
  require_same_shape(a, b, op);
  Tensor out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i], y[i]);
  out.check_finite(op);
  return out;
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_positive(shape_);
  data_.assign(shape_size(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_positive(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw DimensionError("tensor of shape " + shape_string(shape_) +
                         " cannot hold " + std::to_string(data_.size()) +
                         " values");
  }
  check_finite("Tensor");
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  t.check_finite("Tensor::full");
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({m, n}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(shape_));
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                         shape_string(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  check_positive(t.shape_);
  t.data_ = data_;
  return t;
}

Tensor Tensor::slice0(std::size_t i) const {
  if (rank() < 2 || i >= shape_[0]) {
    throw DimensionError("slice0 out of range on " + shape_string(shape_));
  }
  Shape inner(shape_.begin() + 1, shape_.end());
  const std::size_t stride = shape_size(inner);
  Tensor t(std::move(inner));
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * stride), stride,
              t.data_.begin());
  return t;
}

void Tensor::set_slice0(std::size_t i, const Tensor& value) {
  Shape inner(shape_.begin() + 1, shape_.end());
  if (rank() < 2 || i >= shape_[0] || value.shape() != inner) {
    throw DimensionError("set_slice0: " + shape_string(value.shape()) +
                         " does not fit " + shape_string(shape_));
  }
  std::copy(value.data_.begin(), value.data_.end(),
            data_.begin() + static_cast<std::ptrdiff_t>(i * value.size()));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::check_finite(const char* where) const {
  if (!all_finite()) {
    throw NumericError(std::string(where) + ": non-finite value produced");
  }
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) !=
        std::bit_cast<std::uint64_t>(b[i])) {
      return false;
    }
  }
  return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  out.check_finite("scale");
  return out;
}

void add_inplace(Tensor& acc, const Tensor& b) {
  require_same_shape(acc, b, "add_inplace");
  auto o = acc.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += y[i];
  acc.check_finite("add_inplace");
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError("transpose needs a matrix, got " +
                         shape_string(a.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t n = a.dim(1);
  Tensor t({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
  }
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) +
                         " by " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t n = b.dim(1);
  Tensor c({m, n});
  auto cd = c.data();
  auto ad = a.data();
  auto bd = b.data();
  // i-k-j keeps each c[i][j] accumulating in ascending k order.
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = cd.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ad[i * k + p];
      const double* brow = bd.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  c.check_finite("matmul");
  return c;
}

std::size_t conv_output_size(std::size_t input, std::size_t kernel,
                             std::size_t stride, std::size_t padding) {
  if (stride == 0) throw DimensionError("conv stride must be >= 1");
  if (kernel == 0 || kernel > input + 2 * padding) {
    throw DimensionError("kernel " + std::to_string(kernel) +
                         " larger than padded input " +
                         std::to_string(input + 2 * padding));
  }
  return (input + 2 * padding - kernel) / stride + 1;
}

namespace {

struct ConvDims {
  std::size_t c_in, h, w, c_out, k, h_out, w_out;
};

ConvDims conv_dims(const Shape& input, const Shape& kernels,
                   std::size_t stride, std::size_t padding) {
  if (input.size() != 3 || kernels.size() != 4 || kernels[1] != input[0] ||
      kernels[2] != kernels[3]) {
    throw DimensionError("conv2d: input " + shape_string(input) +
                         " incompatible with kernels " +
                         shape_string(kernels));
  }
  ConvDims d{input[0], input[1], input[2], kernels[0], kernels[2], 0, 0};
  d.h_out = conv_output_size(d.h, d.k, stride, padding);
  d.w_out = conv_output_size(d.w, d.k, stride, padding);
  return d;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, std::size_t stride,
              std::size_t padding) {
  const ConvDims d = conv_dims(input.shape(), kernels.shape(), stride, padding);
  Tensor out({d.c_out, d.h_out, d.w_out});
  auto in = input.data();
  auto kw = kernels.data();
  auto o = out.data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t co = 0; co < d.c_out; ++co) {
    for (std::size_t oy = 0; oy < d.h_out; ++oy) {
      for (std::size_t ox = 0; ox < d.w_out; ++ox) {
        double acc = 0.0;
        for (std::size_t ci = 0; ci < d.c_in; ++ci) {
          for (std::size_t ky = 0; ky < d.k; ++ky) {
            const std::ptrdiff_t y =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(d.h)) continue;
            for (std::size_t kx = 0; kx < d.k; ++kx) {
              const std::ptrdiff_t x =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
              if (x < 0 || x >= static_cast<std::ptrdiff_t>(d.w)) continue;
              acc += kw[((co * d.c_in + ci) * d.k + ky) * d.k + kx] *
                     in[(ci * d.h + static_cast<std::size_t>(y)) * d.w +
                        static_cast<std::size_t>(x)];
            }
          }
        }
        o[(co * d.h_out + oy) * d.w_out + ox] = acc;
      }
    }
  }
  out.check_finite("conv2d");
  return out;
}

Tensor conv2d_backward_input(const Tensor& grad_out, const Tensor& kernels,
                             const Shape& input_shape, std::size_t stride,
                             std::size_t padding) {
  const ConvDims d = conv_dims(input_shape, kernels.shape(), stride, padding);
  if (grad_out.shape() != Shape{d.c_out, d.h_out, d.w_out}) {
    throw DimensionError("conv2d_backward_input: bad gradient shape " +
                         shape_string(grad_out.shape()));
  }
  Tensor grad_in(input_shape);
  auto gi = grad_in.data();
  auto go = grad_out.data();
  auto kw = kernels.data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t co = 0; co < d.c_out; ++co) {
    for (std::size_t oy = 0; oy < d.h_out; ++oy) {
      for (std::size_t ox = 0; ox < d.w_out; ++ox) {
        const double g = go[(co * d.h_out + oy) * d.w_out + ox];
        if (g == 0.0) continue;
        for (std::size_t ci = 0; ci < d.c_in; ++ci) {
          for (std::size_t ky = 0; ky < d.k; ++ky) {
            const std::ptrdiff_t y =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(d.h)) continue;
            for (std::size_t kx = 0; kx < d.k; ++kx) {
              const std::ptrdiff_t x =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
              if (x < 0 || x >= static_cast<std::ptrdiff_t>(d.w)) continue;
              gi[(ci * d.h + static_cast<std::size_t>(y)) * d.w +
                 static_cast<std::size_t>(x)] +=
                  g * kw[((co * d.c_in + ci) * d.k + ky) * d.k + kx];
            }
          }
        }
      }
    }
  }
  grad_in.check_finite("conv2d_backward_input");
  return grad_in;
}

Tensor conv2d_backward_kernels(const Tensor& grad_out, const Tensor& input,
                               const Shape& kernel_shape, std::size_t stride,
                               std::size_t padding) {
  const ConvDims d = conv_dims(input.shape(), kernel_shape, stride, padding);
  if (grad_out.shape() != Shape{d.c_out, d.h_out, d.w_out}) {
    throw DimensionError("conv2d_backward_kernels: bad gradient shape " +
                         shape_string(grad_out.shape()));
  }
  Tensor grad_k(kernel_shape);
  auto gk = grad_k.data();
  auto go = grad_out.data();
  auto in = input.data();
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t co = 0; co < d.c_out; ++co) {
    for (std::size_t oy = 0; oy < d.h_out; ++oy) {
      for (std::size_t ox = 0; ox < d.w_out; ++ox) {
        const double g = go[(co * d.h_out + oy) * d.w_out + ox];
        if (g == 0.0) continue;
        for (std::size_t ci = 0; ci < d.c_in; ++ci) {
          for (std::size_t ky = 0; ky < d.k; ++ky) {
            const std::ptrdiff_t y =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
            if (y < 0 || y >= static_cast<std::ptrdiff_t>(d.h)) continue;
            for (std::size_t kx = 0; kx < d.k; ++kx) {
              const std::ptrdiff_t x =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
              if (x < 0 || x >= static_cast<std::ptrdiff_t>(d.w)) continue;
              gk[((co * d.c_in + ci) * d.k + ky) * d.k + kx] +=
                  g * in[(ci * d.h + static_cast<std::size_t>(y)) * d.w +
                         static_cast<std::size_t>(x)];
            }
          }
        }
      }
    }
  }
  grad_k.check_finite("conv2d_backward_kernels");
  return grad_k;
}

}  // namespace reverb
