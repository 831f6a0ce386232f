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

#include "reverb/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "reverb/event_kernel.h"

namespace reverb {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> v) {
    for (double x : v) f64(x);
  }
  void counted_f64s(std::span<const double> v) {
    u32(static_cast<std::uint32_t>(v.size()));
    f64s(v);
  }
  void shape(const Shape& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    for (std::size_t d : s) u32(static_cast<std::uint32_t>(d));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what,
                       pos_);
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto b = take(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  double f64(const char* what) {
    const std::size_t at = pos_;
    const double v = std::bit_cast<double>(u64(what));
    if (!std::isfinite(v)) throw ParseError(std::string("non-finite ") + what, at);
    return v;
  }
  std::vector<double> f64s(std::size_t n, const char* what) {
    if ((in_.size() - pos_) / 8 < n) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what,
                       pos_);
    }
    std::vector<double> v(n);
    for (double& x : v) x = f64(what);
    return v;
  }
  std::vector<double> counted_f64s(const char* what) {
    return f64s(u32(what), what);
  }
  Shape shape(const char* what) {
    const std::size_t at = pos_;
    const std::uint32_t rank = u32(what);
    if (rank == 0 || rank > 8) throw ParseError(std::string("bad rank for ") + what, at);
    Shape s(rank);
    for (auto& d : s) {
      const std::size_t dim_at = pos_;
      d = u32(what);
      if (d == 0) throw ParseError(std::string("zero dimension in ") + what, dim_at);
    }
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> encode(const Network& net, CheckpointForm form) {
  net.validate();
  Writer w;
  w.bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(kCheckpointMagic), 4));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(form));
  w.u8(static_cast<std::uint8_t>(net.mode));
  w.u8(static_cast<std::uint8_t>(net.transform));
  w.u32(static_cast<std::uint32_t>(net.timesteps));
  w.shape(net.input_shape);
  w.u32(static_cast<std::uint32_t>(net.layers.size()));
  for (const BinaryLayer& layer : net.layers) {
    w.u8(static_cast<std::uint8_t>(layer.kind));
    w.u8(layer.binarize);
    w.u8(layer.learn_alpha);
    w.u8(layer.affine.has_value());
    w.shape(layer.w_latent.shape());
    w.u32(static_cast<std::uint32_t>(layer.stride));
    w.u32(static_cast<std::uint32_t>(layer.padding));
  }
  for (const NeuronParams& p : net.neurons) {
    w.f64(p.tau);
    w.f64(p.v_th);
    w.u8(static_cast<std::uint8_t>(p.mode));
    w.counted_f64s(p.scale);
    w.counted_f64s(p.channel_v_th);
  }
  for (const BinaryLayer& layer : net.layers) {
    if (form == CheckpointForm::kInference && layer.binarize) {
      const std::vector<std::uint8_t> bits = pack_signs(layer.w_latent);
      w.u32(static_cast<std::uint32_t>(bits.size()));
      w.bytes(bits);
    } else {
      w.f64s(layer.w_latent.data());
      w.f64s(layer.alpha);
    }
    if (layer.affine) {
      w.f64s(layer.affine->gamma);
      w.f64s(layer.affine->beta);
    }
  }
  return w.take();
}

void write_atomically(const std::string& path,
                      const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move checkpoint into '" + path + "'");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
  return encode(net, CheckpointForm::kTrained);
}

std::vector<std::uint8_t> encode_checkpoint(const InferenceNetwork& inference) {
  inference.validate();
  return encode(inference.net, CheckpointForm::kInference);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    throw ParseError("bad checkpoint magic", 0);
  }
  const std::size_t version_at = r.offset();
  if (r.u32("version") != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version", version_at);
  }
  const std::size_t flags_at = r.offset();
  const std::uint32_t flags = r.u32("flags");
  if (flags > 1) throw ParseError("unknown checkpoint flags", flags_at);
  Checkpoint ck;
  ck.form = static_cast<CheckpointForm>(flags & 1u);
  Network& net = ck.net;

  std::size_t at = r.offset();
  const std::uint8_t mode = r.u8("mode");
  if (mode > 2) throw ParseError("unknown training mode", at);
  net.mode = static_cast<TrainMode>(mode);
  at = r.offset();
  const std::uint8_t transform = r.u8("weight transform");
  if (transform > 1) throw ParseError("unknown weight transform", at);
  net.transform = static_cast<WeightTransform>(transform);
  net.timesteps = r.u32("timesteps");
  net.input_shape = r.shape("input shape");

  at = r.offset();
  const std::uint32_t count = r.u32("layer count");
  if (count < 2 || count > 1024) throw ParseError("bad layer count", at);
  net.layers.resize(count);
  std::vector<bool> has_affine(count);
  for (std::uint32_t l = 0; l < count; ++l) {
    BinaryLayer& layer = net.layers[l];
    at = r.offset();
    const std::uint8_t kind = r.u8("layer kind");
    if (kind > 1) throw ParseError("unknown layer kind", at);
    layer.kind = static_cast<LayerKind>(kind);
    layer.binarize = r.u8("binarize flag") != 0;
    layer.learn_alpha = r.u8("learn_alpha flag") != 0;
    has_affine[l] = r.u8("affine flag") != 0;
    at = r.offset();
    const Shape wshape = r.shape("weight shape");
    if (wshape.size() != (layer.kind == LayerKind::kDense ? 2u : 4u)) {
      throw ParseError("weight rank does not match layer kind", at);
    }
    layer.w_latent = Tensor(wshape);
    layer.stride = r.u32("stride");
    layer.padding = r.u32("padding");
  }
  net.neurons.resize(count - 1);
  for (NeuronParams& p : net.neurons) {
    p.tau = r.f64("tau");
    p.v_th = r.f64("v_th");
    at = r.offset();
    const std::uint8_t fm = r.u8("fire mode");
    if (fm > 2) throw ParseError("unknown fire mode", at);
    p.mode = static_cast<FireMode>(fm);
    p.scale = r.counted_f64s("firing scale");
    p.channel_v_th = r.counted_f64s("channel thresholds");
  }
  for (std::uint32_t l = 0; l < count; ++l) {
    BinaryLayer& layer = net.layers[l];
    const std::size_t out = layer.out_channels();
    if (ck.form == CheckpointForm::kInference && layer.binarize) {
      at = r.offset();
      const std::uint32_t nbytes = r.u32("packed weight size");
      if (nbytes != (layer.w_latent.size() + 7) / 8) {
        throw ParseError("packed weight size does not match shape", at);
      }
      layer.w_latent = unpack_signs(r.take(nbytes, "packed weights"),
                                    layer.w_latent.shape());
      layer.alpha.assign(out, 1.0);
    } else {
      at = r.offset();
      std::vector<double> w = r.f64s(layer.w_latent.size(), "weights");
      layer.w_latent = Tensor(layer.w_latent.shape(), std::move(w));
      layer.alpha = r.f64s(out, "alpha");
    }
    if (has_affine[l]) {
      Affine a;
      a.gamma = r.f64s(out, "affine gamma");
      a.beta = r.f64s(out, "affine beta");
      layer.affine = std::move(a);
    }
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint", r.offset());
  try {
    if (ck.form == CheckpointForm::kInference) {
      InferenceNetwork{net}.validate();
    } else {
      net.validate();
    }
  } catch (const Error& e) {
    throw ParseError(std::string("inconsistent checkpoint: ") + e.what(),
                     r.offset());
  }
  return ck;
}

void save_checkpoint(const std::string& path, const Network& net) {
  write_atomically(path, encode_checkpoint(net));
}

void save_checkpoint(const std::string& path, const InferenceNetwork& inference) {
  write_atomically(path, encode_checkpoint(inference));
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return bytes;
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace reverb
