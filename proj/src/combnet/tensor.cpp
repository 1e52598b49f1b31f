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

#include "combnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "combnet/error.hpp"

namespace combnet {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::LayoutMismatch: return "layout mismatch";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Unsupported: return "unsupported configuration";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::MissingInput: return "missing input";
    case ErrorCode::Format: return "malformed file";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::BadVersion: return "bad version";
    case ErrorCode::Checksum: return "checksum mismatch";
    case ErrorCode::MissingWeights: return "missing weights";
    case ErrorCode::NonFinite: return "non-finite value";
  }
  return "unknown error";
}

const char* layout_name(Layout layout) noexcept {
  return layout == Layout::ChannelPlanar ? "planar" : "interleaved";
}

namespace {

const Shape& checked(const Shape& shape) {
  require(shape.n >= 1 && shape.c >= 1 && shape.h >= 1 && shape.w >= 1,
          ErrorCode::ShapeMismatch, "tensor dims must be positive");
  return shape;
}

}  // namespace

Tensor::Tensor(Shape shape, Layout layout)
    : shape_(checked(shape)), layout_(layout), data_(shape.count(), 0.0f) {}

Tensor::Tensor(Shape shape, Layout layout, std::vector<float> data)
    : shape_(shape), layout_(layout), data_(std::move(data)) {
  require(shape.n >= 1 && shape.c >= 1 && shape.h >= 1 && shape.w >= 1,
          ErrorCode::ShapeMismatch, "tensor dims must be positive");
  require(data_.size() == shape.count(), ErrorCode::ShapeMismatch,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match dims product " + std::to_string(shape.count()));
}

namespace {

Tensor relayout(const Tensor& t, Layout to) {
  Tensor out(t.shape(), to);
  const Shape& s = t.shape();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) out.at(n, c, y, x) = t.at(n, c, y, x);
  return out;
}

}  // namespace

Tensor to_interleaved(const Tensor& t) {
  require(t.layout() == Layout::ChannelPlanar, ErrorCode::LayoutMismatch,
          "to_interleaved expects a planar tensor");
  return relayout(t, Layout::ChannelInterleaved);
}

Tensor to_planar(const Tensor& t) {
  require(t.layout() == Layout::ChannelInterleaved, ErrorCode::LayoutMismatch,
          "to_planar expects an interleaved tensor");
  return relayout(t, Layout::ChannelPlanar);
}

Tensor with_layout(const Tensor& t, Layout layout) {
  if (t.layout() == layout) return t;
  return relayout(t, layout);
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorCode::ShapeMismatch,
          "max_abs_diff: shapes differ");
  float m = 0.0f;
  const Shape& s = a.shape();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) {
          float d = std::fabs(a.at(n, c, y, x) - b.at(n, c, y, x));
          if (std::isnan(d)) return d;
          m = std::max(m, d);
        }
  return m;
}

WeightArray::WeightArray(int out, int in_pg, int h, int w)
    : out_ch(out), in_per_group(in_pg), kh(h), kw(w) {
  require(out >= 1 && in_pg >= 1 && h >= 1 && w >= 1, ErrorCode::ShapeMismatch,
          "weight dims must be positive");
  data.assign(count(), 0.0f);
}

namespace {

// Visits packed positions in storage order, handing the source offset in the
// unpacked array to `fn(packed_index, source_index)`.
template <typename Fn>
void for_each_packed(int out_ch, int in_pg, int kh, int kw, int groups,
                     int lane, Fn&& fn) {
  const int per_group = out_ch / groups;
  std::size_t p = 0;
  for (int g = 0; g < groups; ++g) {
    for (int b0 = 0; b0 < per_group; b0 += lane) {
      const int bw = std::min(lane, per_group - b0);
      for (int ky = 0; ky < kh; ++ky)
        for (int kx = 0; kx < kw; ++kx)
          for (int i = 0; i < in_pg; ++i)
            for (int l = 0; l < bw; ++l) {
              const int o = g * per_group + b0 + l;
              const std::size_t src =
                  ((static_cast<std::size_t>(o) * in_pg + i) * kh + ky) * kw + kx;
              fn(p++, src);
            }
    }
  }
}

}  // namespace

PackedWeights pack_kernels(const WeightArray& w, int groups, int lane_width) {
  require(groups >= 1 && lane_width >= 1, ErrorCode::Config,
          "groups and lane_width must be positive");
  require(w.out_ch >= 1 && w.in_per_group >= 1 && w.kh >= 1 && w.kw >= 1,
          ErrorCode::ShapeMismatch, "weight dims must be positive");
  require(w.out_ch % groups == 0, ErrorCode::Config,
          "groups (" + std::to_string(groups) + ") does not divide out_ch (" +
              std::to_string(w.out_ch) + ")");
  require(w.data.size() == w.count(), ErrorCode::ShapeMismatch,
          "weight data length does not match dims");

  PackedWeights p;
  p.out_ch = w.out_ch;
  p.in_per_group = w.in_per_group;
  p.kh = w.kh;
  p.kw = w.kw;
  p.groups = groups;
  p.lane_width = lane_width;
  p.alignment_warning = (w.out_ch / groups) % lane_width != 0;
  p.data.resize(w.data.size());
  for_each_packed(w.out_ch, w.in_per_group, w.kh, w.kw, groups, lane_width,
                  [&](std::size_t dst, std::size_t src) { p.data[dst] = w.data[src]; });
  return p;
}

WeightArray unpack_kernels(const PackedWeights& p) {
  WeightArray w(p.out_ch, p.in_per_group, p.kh, p.kw);
  require(p.data.size() == w.count(), ErrorCode::ShapeMismatch,
          "packed data length does not match dims");
  for_each_packed(p.out_ch, p.in_per_group, p.kh, p.kw, p.groups, p.lane_width,
                  [&](std::size_t src, std::size_t dst) { w.data[dst] = p.data[src]; });
  return w;
}

}  // namespace combnet
