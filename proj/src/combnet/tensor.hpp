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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace combnet {

// ChannelPlanar is CHW (channel slowest), ChannelInterleaved is HWC
// (channel fastest). The batch index is always outermost.
enum class Layout { ChannelPlanar, ChannelInterleaved };

const char* layout_name(Layout layout) noexcept;

struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, Layout layout);
  Tensor(Shape shape, Layout layout, std::vector<float> data);

  static Tensor planar(int c, int h, int w) {
    return Tensor({1, c, h, w}, Layout::ChannelPlanar);
  }
  static Tensor interleaved(int c, int h, int w) {
    return Tensor({1, c, h, w}, Layout::ChannelInterleaved);
  }

  const Shape& shape() const noexcept { return shape_; }
  Layout layout() const noexcept { return layout_; }
  int batch() const noexcept { return shape_.n; }
  int channels() const noexcept { return shape_.c; }
  int height() const noexcept { return shape_.h; }
  int width() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  std::vector<float>& storage() noexcept { return data_; }
  const std::vector<float>& storage() const noexcept { return data_; }

  // Flat offset of (n, c, y, x) under this tensor's layout.
  std::size_t offset(int n, int c, int y, int x) const noexcept {
    if (layout_ == Layout::ChannelPlanar) {
      return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) *
                 shape_.w +
             x;
    }
    return ((static_cast<std::size_t>(n) * shape_.h + y) * shape_.w + x) *
               shape_.c +
           c;
  }

  float at(int c, int y, int x) const noexcept { return data_[offset(0, c, y, x)]; }
  float& at(int c, int y, int x) noexcept { return data_[offset(0, c, y, x)]; }
  float at(int n, int c, int y, int x) const noexcept {
    return data_[offset(n, c, y, x)];
  }
  float& at(int n, int c, int y, int x) noexcept {
    return data_[offset(n, c, y, x)];
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_{};
  Layout layout_ = Layout::ChannelPlanar;
  std::vector<float> data_;
};

Tensor to_interleaved(const Tensor& t);
Tensor to_planar(const Tensor& t);
// Returns t unchanged when it already has the requested layout.
Tensor with_layout(const Tensor& t, Layout layout);

float max_abs_diff(const Tensor& a, const Tensor& b);

// Convolution filter bank in (out_ch, in_ch_per_group, kh, kw) order.
struct WeightArray {
  int out_ch = 0;
  int in_per_group = 0;
  int kh = 0;
  int kw = 0;
  std::vector<float> data;

  WeightArray() = default;
  WeightArray(int out, int in_pg, int h, int w);

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(out_ch) * in_per_group * kh * kw;
  }
  std::size_t offset(int o, int i, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(o) * in_per_group + i) * kh + y) * kw + x;
  }
  float at(int o, int i, int y, int x) const noexcept {
    return data[offset(o, i, y, x)];
  }
  float& at(int o, int i, int y, int x) noexcept {
    return data[offset(o, i, y, x)];
  }
  friend bool operator==(const WeightArray&, const WeightArray&) = default;
};

// Kernel stack reordered for dot-product traversal over interleaved input.
//
// Order: group, lane block of output channels within the group, ky, kx,
// input channel within the group, lane. The last block of a group is
// narrower when filters-per-group is not a lane multiple; no padding
// values are introduced.
struct PackedWeights {
  int out_ch = 0;
  int in_per_group = 0;
  int kh = 0;
  int kw = 0;
  int groups = 1;
  int lane_width = 4;
  bool alignment_warning = false;
  std::vector<float> data;

  int filters_per_group() const noexcept { return out_ch / groups; }
};

PackedWeights pack_kernels(const WeightArray& w, int groups, int lane_width = 4);
WeightArray unpack_kernels(const PackedWeights& p);

}  // namespace combnet
