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

#include "reverb/event_kernel.h"

#include <string>

namespace reverb {

void EventList::validate() const {
  const std::size_t n = shape_size(shape);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].value == 0.0) {
      throw StateError("event list contains a zero-valued event");
    }
    if (events[i].index >= n) {
      throw StateError("event index " + std::to_string(events[i].index) +
                       " outside source layer of size " + std::to_string(n));
    }
    if (i > 0 && events[i].index <= events[i - 1].index) {
      throw StateError("event indices must be strictly ascending");
    }
  }
}

EventList make_event_list(std::span<const double> spikes, const Shape& shape,
                          std::size_t source_layer, std::size_t t) {
  if (spikes.size() != shape_size(shape)) {
    throw DimensionError("make_event_list: " + std::to_string(spikes.size()) +
                         " spikes for shape " + shape_string(shape));
  }
  EventList list;
  list.source_layer = source_layer;
  list.t = t;
  list.shape = shape;
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    if (spikes[i] != 0.0) {
      list.events.push_back(Event{static_cast<std::uint32_t>(i), spikes[i]});
    }
  }
  return list;
}

std::vector<std::uint8_t> pack_signs(const Tensor& signs) {
  std::vector<std::uint8_t> bits((signs.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 1.0) {
      bits[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    } else if (signs[i] != -1.0) {
      throw ModeError("pack_signs: weight " + std::to_string(signs[i]) +
                      " is not +-1");
    }
  }
  return bits;
}

Tensor unpack_signs(std::span<const std::uint8_t> bits, const Shape& shape) {
  const std::size_t n = shape_size(shape);
  if (bits.size() != (n + 7) / 8) {
    throw DimensionError("unpack_signs: " + std::to_string(bits.size()) +
                         " bytes for " + std::to_string(n) + " weights");
  }
  Tensor t(shape);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = ((bits[i >> 3] >> (i & 7)) & 1u) ? 1.0 : -1.0;
  }
  return t;
}

SignTable::SignTable(const BinaryLayer& layer, const Shape& input_shape)
    : kind_(layer.kind), input_shape_(input_shape) {
  if (!layer.binarize) {
    throw ModeError("addition-only kernel needs a binarized layer");
  }
  for (double a : layer.alpha) {
    if (a != 1.0) {
      throw ModeError("addition-only kernel needs a folded layer (alpha == 1)");
    }
  }
  output_shape_ = layer.output_shape(input_shape);
  bits_ = pack_signs(layer.w_latent);  // throws on non-sign weights
  out_size_ = layer.out_channels();
  in_size_ = shape_size(input_shape);
  c_out_ = layer.out_channels();
  c_in_ = layer.in_channels();
  k_ = layer.kernel();
  stride_ = layer.stride;
  padding_ = layer.padding;
}

OpCounts& OpAuditValue::counts() {
  thread_local OpCounts c;
  return c;
}

Tensor addition_only_forward(const BinaryLayer& layer, const EventList& events,
                             std::uint64_t* sops) {
  events.validate();
  const SignTable table(layer, events.shape);
  std::vector<double> acc = accumulate_signed_events<double>(table, events);
  if (sops) {
    const std::size_t out_channels = table.kind() == LayerKind::kDense
                                         ? table.out_size()
                                         : table.c_out();
    for (const Event& e : events.events) {
      for_each_fanout(table.kind(), table.input_shape(), out_channels,
                      table.kernel(), table.stride(), table.padding(), e.index,
                      [&](std::size_t, std::size_t, std::size_t, std::size_t,
                          std::size_t) { ++*sops; });
    }
  }
  return Tensor(table.output_shape(), std::move(acc));
}

}  // namespace reverb
