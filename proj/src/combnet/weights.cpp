/*
 * Copyright 2026 The CombNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "combnet/weights.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "combnet/error.hpp"

namespace combnet {

std::size_t WeightEntry::count() const noexcept {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void WeightStore::set(const std::string& name, std::vector<std::uint32_t> dims,
                      std::vector<float> data) {
  WeightEntry e{std::move(dims), std::move(data)};
  require(e.data.size() == e.count(), ErrorCode::ShapeMismatch,
          "weight '" + name + "': data length does not match dims");
  if (auto it = index_.find(name); it != index_.end()) {
    entries_[it->second].second = std::move(e);
    return;
  }
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(e));
}

const WeightEntry* WeightStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

WeightEntry* WeightStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

const WeightEntry& WeightStore::get(const std::string& name) const {
  const WeightEntry* e = find(name);
  require(e != nullptr, ErrorCode::MissingWeights, "missing weight array '" + name + "'");
  return *e;
}

std::size_t WeightStore::total_values() const noexcept {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.data.size();
  return n;
}

namespace {

std::mt19937_64 stream_for(std::uint64_t seed, const std::string& name) {
  return std::mt19937_64(fnv1a64(name.data(), name.size(), seed ^ 0x9e3779b97f4a7c15ull));
}

// 24 random bits mapped to [-1, 1); identical on every platform.
float uniform_pm1(std::mt19937_64& rng) {
  const auto bits = static_cast<std::uint32_t>(rng() >> 40);
  return static_cast<float>(bits) * (2.0f / 16777216.0f) - 1.0f;
}

std::vector<std::uint32_t> conv_dims(const ConvSpec& s) {
  return {static_cast<std::uint32_t>(s.out_ch), static_cast<std::uint32_t>(s.in_per_group()),
          static_cast<std::uint32_t>(s.kh), static_cast<std::uint32_t>(s.kw)};
}

const char* const kBnSuffix[4] = {".bn_gamma", ".bn_beta", ".bn_mean", ".bn_var"};

}  // namespace

WeightStore init_weights(const GraphSpec& g, std::uint64_t seed) {
  WeightStore ws;
  ws.seed = seed;
  ws.config_hash = config_hash(g.config);
  for (const ConvLayer* l : all_conv_layers(g)) {
    const ConvSpec& s = l->conv;
    const double fan_in = static_cast<double>(s.in_per_group()) * s.kh * s.kw;
    const double fan_out = static_cast<double>(s.filters_per_group()) * s.kh * s.kw;
    const float limit = static_cast<float>(std::sqrt(6.0 / (fan_in + fan_out)));
    const std::string wname = l->name + ".weight";
    auto rng = stream_for(seed, wname);
    std::vector<float> w(static_cast<std::size_t>(s.out_ch) * s.in_per_group() * s.kh * s.kw);
    for (float& v : w) v = limit * uniform_pm1(rng);
    ws.set(wname, conv_dims(s), std::move(w));
    const auto out = static_cast<std::uint32_t>(s.out_ch);
    if (s.has_bias) ws.set(l->name + ".bias", {out}, std::vector<float>(out, 0.0f));
    if (l->batchnorm) {
      ws.set(l->name + kBnSuffix[0], {out}, std::vector<float>(out, 1.0f));
      ws.set(l->name + kBnSuffix[1], {out}, std::vector<float>(out, 0.0f));
      ws.set(l->name + kBnSuffix[2], {out}, std::vector<float>(out, 0.0f));
      ws.set(l->name + kBnSuffix[3], {out}, std::vector<float>(out, 1.0f));
    }
  }
  return ws;
}

void randomize_normalization(WeightStore& ws, const GraphSpec& g, std::uint64_t seed) {
  for (const ConvLayer* l : all_conv_layers(g)) {
    auto fill = [&](const std::string& name, float lo, float hi) {
      WeightEntry* e = ws.find(name);
      if (!e) return;
      auto rng = stream_for(seed, name);
      for (float& v : e->data) v = lo + (hi - lo) * 0.5f * (uniform_pm1(rng) + 1.0f);
    };
    fill(l->name + ".bias", -0.2f, 0.2f);
    fill(l->name + kBnSuffix[0], 0.5f, 1.5f);
    fill(l->name + kBnSuffix[1], -0.2f, 0.2f);
    fill(l->name + kBnSuffix[2], -0.2f, 0.2f);
    fill(l->name + kBnSuffix[3], 0.5f, 1.5f);
  }
}

void check_weights(const GraphSpec& g, const WeightStore& ws) {
  auto expect = [&](const std::string& name, const std::vector<std::uint32_t>& dims) {
    const WeightEntry& e = ws.get(name);
    require(e.dims == dims, ErrorCode::ShapeMismatch, "weight '" + name + "' has wrong shape");
  };
  std::size_t expected = 0;
  for (const ConvLayer* l : all_conv_layers(g)) {
    const ConvSpec& s = l->conv;
    const auto out = static_cast<std::uint32_t>(s.out_ch);
    expect(l->name + ".weight", conv_dims(s));
    ++expected;
    if (s.has_bias) {
      expect(l->name + ".bias", {out});
      ++expected;
    }
    if (l->batchnorm) {
      for (const char* suffix : kBnSuffix) expect(l->name + suffix, {out});
      expected += 4;
    }
  }
  require(ws.size() == expected, ErrorCode::ShapeMismatch,
          "weight store has " + std::to_string(ws.size()) + " arrays, graph expects " +
              std::to_string(expected));
}

LayerParams layer_params(const WeightStore& ws, const ConvLayer& l, float bn_epsilon) {
  const ConvSpec& s = l.conv;
  LayerParams p;
  const WeightEntry& w = ws.get(l.name + ".weight");
  require(w.dims == conv_dims(s), ErrorCode::ShapeMismatch,
          "weight '" + l.name + ".weight' has wrong shape");
  p.weights = WeightArray(s.out_ch, s.in_per_group(), s.kh, s.kw);
  p.weights.data = w.data;
  if (s.has_bias) p.bias = ws.get(l.name + ".bias").data;
  if (l.batchnorm) {
    BnParams bn;
    bn.gamma = ws.get(l.name + kBnSuffix[0]).data;
    bn.beta = ws.get(l.name + kBnSuffix[1]).data;
    bn.mean = ws.get(l.name + kBnSuffix[2]).data;
    bn.var = ws.get(l.name + kBnSuffix[3]).data;
    bn.epsilon = bn_epsilon;
    bn.validate(s.out_ch);
    p.bn = std::move(bn);
  }
  return p;
}

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    auto* c = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), c, c + n);
  }
  std::vector<std::uint8_t> buf;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  void need(std::size_t k) const {
    require(pos_ + k <= n_, ErrorCode::Format, "weight file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(p_[pos_] | (p_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  const std::uint8_t* take(std::size_t k) {
    need(k);
    const std::uint8_t* r = p_ + pos_;
    pos_ += k;
    return r;
  }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::uint8_t* p, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> serialize_weights(const WeightStore& ws) {
  static_assert(sizeof(float) == 4);
  Writer w;
  w.bytes("CNWB", 4);
  w.u32(kWeightFormatVersion);
  w.u32(static_cast<std::uint32_t>(ws.size()));
  for (const auto& [name, e] : ws.entries()) {
    require(name.size() <= 0xffff, ErrorCode::InvalidArgument, "weight name too long");
    require(e.dims.size() <= 0xff, ErrorCode::InvalidArgument, "too many weight dims");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u8(0);
    w.u8(static_cast<std::uint8_t>(e.dims.size()));
    for (auto d : e.dims) w.u32(d);
    for (float f : e.data) w.u32(std::bit_cast<std::uint32_t>(f));
  }
  w.u32(crc32_of(w.buf.data(), w.buf.size()));
  return std::move(w.buf);
}

WeightStore parse_weights(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 16, ErrorCode::Format, "weight file too short");
  require(std::memcmp(bytes.data(), "CNWB", 4) == 0, ErrorCode::BadMagic,
          "weight file has bad magic");
  Reader header(bytes.data() + 4, 4);
  const std::uint32_t version = header.u32();
  require(version == kWeightFormatVersion, ErrorCode::BadVersion,
          "unsupported weight file version " + std::to_string(version));
  const std::size_t body = bytes.size() - 4;
  Reader tail(bytes.data() + body, 4);
  require(tail.u32() == crc32_of(bytes.data(), body), ErrorCode::Checksum,
          "weight file checksum mismatch");

  Reader r(bytes.data() + 8, body - 8);
  const std::uint32_t count = r.u32();
  WeightStore ws;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    const auto* name_bytes = r.take(len);
    std::string name(reinterpret_cast<const char*>(name_bytes), len);
    const std::uint8_t dtype = r.u8();
    require(dtype == 0, ErrorCode::Format, "weight '" + name + "' has unknown dtype");
    const std::uint8_t ndim = r.u8();
    std::vector<std::uint32_t> dims(ndim);
    std::size_t n = 1;
    for (auto& d : dims) {
      d = r.u32();
      n *= d;
      require(n <= r.remaining(), ErrorCode::Format, "weight '" + name + "' dims exceed file");
    }
    const auto* raw = r.take(n * 4);
    std::vector<float> data(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(raw[4 * k + b]) << (8 * b);
      data[k] = std::bit_cast<float>(u);
    }
    require(ws.find(name) == nullptr, ErrorCode::Format, "duplicate weight '" + name + "'");
    ws.set(name, std::move(dims), std::move(data));
  }
  require(r.remaining() == 0, ErrorCode::Format, "trailing bytes in weight file");
  return ws;
}

void save_weights(const WeightStore& ws, const std::string& path) {
  const auto bytes = serialize_weights(ws);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorCode::Io, "write failed for '" + path + "'");
}

WeightStore load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::MissingInput, "cannot open weights '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return parse_weights(bytes);
}

}  // namespace combnet
