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

// Event-driven synaptic kernels. Only neurons that emitted a nonzero spike
// produce work, and neither kernel multiplies a weight by an activation:
//
//  * sign weights, real spikes:  x += o  or  x -= o
//  * real weights, unit spikes:  x += w
//
// Events are scattered in ascending source index, which reproduces the
// accumulation order of the dense reference kernels in tensor.h, so results
// are bit-identical to them.
//
// The accumulators are templated so an operation-counting value type can
// audit the kernels (see OpAuditValue).

#ifndef REVERB_EVENT_KERNEL_H_
#define REVERB_EVENT_KERNEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reverb/binary_layer.h"
#include "reverb/tensor.h"

namespace reverb {

struct Event {
  std::uint32_t index;  // flat per-sample index in the source layer
  double value;
};

// Nonzero spikes of one sample at one timestep. Values are never 0 and
// indices are strictly ascending.
struct EventList {
  std::size_t source_layer = 0;
  std::size_t t = 0;
  Shape shape;  // per-sample shape of the source layer's output
  std::vector<Event> events;

  // Throws StateError on a zero-valued or out-of-order event.
  void validate() const;
};

// Collects the nonzero entries of a single sample's spikes.
EventList make_event_list(std::span<const double> spikes, const Shape& shape,
                          std::size_t source_layer, std::size_t t);

// One bit per weight, LSB first, bit set <=> weight +1.
std::vector<std::uint8_t> pack_signs(const Tensor& signs);
Tensor unpack_signs(std::span<const std::uint8_t> bits, const Shape& shape);

// Fan-out table of a folded binarized layer, rebuilt from packed sign bits.
class SignTable {
 public:
  // Throws ModeError unless the layer is binarized with alpha == 1 and
  // weights in {-1, +1}.
  SignTable(const BinaryLayer& layer, const Shape& input_shape);

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  LayerKind kind() const { return kind_; }

  bool positive(std::size_t out, std::size_t in) const {
    const std::size_t bit = out * in_size_ + in;
    return (bits_[bit >> 3] >> (bit & 7)) & 1u;
  }
  bool positive_tap(std::size_t co, std::size_t ci, std::size_t ky,
                    std::size_t kx) const {
    const std::size_t bit = ((co * c_in_ + ci) * k_ + ky) * k_ + kx;
    return (bits_[bit >> 3] >> (bit & 7)) & 1u;
  }

  std::size_t out_size() const { return out_size_; }
  std::size_t in_size() const { return in_size_; }
  std::size_t c_in() const { return c_in_; }
  std::size_t c_out() const { return c_out_; }
  std::size_t kernel() const { return k_; }
  std::size_t stride() const { return stride_; }
  std::size_t padding() const { return padding_; }

 private:
  LayerKind kind_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<std::uint8_t> bits_;
  std::size_t out_size_ = 0;
  std::size_t in_size_ = 0;
  std::size_t c_in_ = 0, c_out_ = 0, k_ = 1, stride_ = 1, padding_ = 0;
};

// Visits every (output index, weight tap) reached by input `index`, in
// ascending output order. Shared by both kernels.
template <typename Visit>
void for_each_fanout(LayerKind kind, const Shape& in_shape,
                     std::size_t out_channels, std::size_t kernel,
                     std::size_t stride, std::size_t padding,
                     std::size_t index, Visit&& visit) {
  if (kind == LayerKind::kDense) {
    for (std::size_t o = 0; o < out_channels; ++o) visit(o, o, 0, 0, 0);
    return;
  }
  const std::size_t h = in_shape[1];
  const std::size_t w = in_shape[2];
  const std::size_t h_out = (h + 2 * padding - kernel) / stride + 1;
  const std::size_t w_out = (w + 2 * padding - kernel) / stride + 1;
  const std::size_t ci = index / (h * w);
  const std::size_t y = (index / w) % h;
  const std::size_t x = index % w;
  for (std::size_t co = 0; co < out_channels; ++co) {
    for (std::size_t ky = 0; ky < kernel; ++ky) {
      // oy * stride + ky - padding == y
      const std::size_t num_y = y + padding;
      if (num_y < ky || (num_y - ky) % stride) continue;
      const std::size_t oy = (num_y - ky) / stride;
      if (oy >= h_out) continue;
      for (std::size_t kx = 0; kx < kernel; ++kx) {
        const std::size_t num_x = x + padding;
        if (num_x < kx || (num_x - kx) % stride) continue;
        const std::size_t ox = (num_x - kx) / stride;
        if (ox >= w_out) continue;
        visit((co * h_out + oy) * w_out + ox, co, ci, ky, kx);
      }
    }
  }
}

// Sign weights, real-valued events. `Value` must be constructible from
// double and support += and -=.
template <typename Value>
std::vector<Value> accumulate_signed_events(const SignTable& table,
                                            const EventList& events) {
  std::vector<Value> acc(shape_size(table.output_shape()), Value(0.0));
  const std::size_t out_channels =
      table.kind() == LayerKind::kDense ? table.out_size() : table.c_out();
  for (const Event& e : events.events) {
    const Value o(e.value);
    for_each_fanout(table.kind(), table.input_shape(), out_channels,
                    table.kernel(), table.stride(), table.padding(), e.index,
                    [&](std::size_t out, std::size_t co, std::size_t ci,
                        std::size_t ky, std::size_t kx) {
                      const bool plus =
                          table.kind() == LayerKind::kDense
                              ? table.positive(out, e.index)
                              : table.positive_tap(co, ci, ky, kx);
                      if (plus) {
                        acc[out] += o;
                      } else {
                        acc[out] -= o;
                      }
                    });
  }
  return acc;
}

// Real weights, unit events (binary spikes). Throws ModeError on an event
// whose value is not 1.
template <typename Value>
std::vector<Value> accumulate_unit_events(const BinaryLayer& layer,
                                          const Shape& input_shape,
                                          const EventList& events) {
  const Shape out_shape = layer.output_shape(input_shape);
  std::vector<Value> acc(shape_size(out_shape), Value(0.0));
  const std::size_t in_size = shape_size(input_shape);
  const std::size_t k = layer.kernel();
  const std::size_t c_in = layer.in_channels();
  const auto w = layer.w_latent.data();
  for (const Event& e : events.events) {
    if (e.value != 1.0) {
      throw ModeError("unit-event kernel received a non-binary spike");
    }
    for_each_fanout(layer.kind, input_shape, layer.out_channels(), k,
                    layer.stride, layer.padding, e.index,
                    [&](std::size_t out, std::size_t co, std::size_t ci,
                        std::size_t ky, std::size_t kx) {
                      const std::size_t tap =
                          layer.kind == LayerKind::kDense
                              ? out * in_size + e.index
                              : ((co * c_in + ci) * k + ky) * k + kx;
                      acc[out] += Value(w[tap]);
                    });
  }
  return acc;
}

struct OpCounts {
  std::uint64_t additions = 0;
  std::uint64_t multiplications = 0;
};

// Scalar that tallies every arithmetic operation applied to it into a
// thread-local OpCounts. Used to audit the event kernels.
class OpAuditValue {
 public:
  explicit OpAuditValue(double v) : v_(v) {}

  static OpCounts& counts();
  static void reset() { counts() = OpCounts{}; }

  double value() const { return v_; }

  OpAuditValue& operator+=(const OpAuditValue& o) {
    ++counts().additions;
    v_ += o.v_;
    return *this;
  }
  OpAuditValue& operator-=(const OpAuditValue& o) {
    ++counts().additions;
    v_ -= o.v_;
    return *this;
  }
  friend OpAuditValue operator*(const OpAuditValue& a, const OpAuditValue& b) {
    ++counts().multiplications;
    return OpAuditValue(a.v_ * b.v_);
  }
  friend OpAuditValue operator*(double a, const OpAuditValue& b) {
    ++counts().multiplications;
    return OpAuditValue(a * b.v_);
  }
  friend OpAuditValue operator*(const OpAuditValue& a, double b) {
    ++counts().multiplications;
    return OpAuditValue(a.v_ * b);
  }

 private:
  double v_;
};

// Dense-layer or conv-layer currents for one sample from its events, using
// the signed kernel. Adds the number of accumulates to `sops` when given.
Tensor addition_only_forward(const BinaryLayer& layer, const EventList& events,
                             std::uint64_t* sops = nullptr);

}  // namespace reverb

#endif  // REVERB_EVENT_KERNEL_H_
