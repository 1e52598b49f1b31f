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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "combnet/tensor.hpp"

namespace combnet {

enum class Padding { Same, Valid };

struct ConvSpec {
  int in_ch = 1;
  int out_ch = 1;
  int kh = 3;
  int kw = 3;
  int stride = 1;
  Padding padding = Padding::Same;
  int dilation = 1;
  int groups = 1;
  bool has_bias = false;

  int in_per_group() const noexcept { return in_ch / groups; }
  int filters_per_group() const noexcept { return out_ch / groups; }
  // Same padding is symmetric floor(d*(k-1)/2) on each side.
  int pad_h() const noexcept {
    return padding == Padding::Same ? dilation * (kh - 1) / 2 : 0;
  }
  int pad_w() const noexcept {
    return padding == Padding::Same ? dilation * (kw - 1) / 2 : 0;
  }
  int out_h(int in_h) const noexcept {
    return (in_h + 2 * pad_h() - dilation * (kh - 1) - 1) / stride + 1;
  }
  int out_w(int in_w) const noexcept {
    return (in_w + 2 * pad_w() - dilation * (kw - 1) - 1) / stride + 1;
  }

  void validate() const;
  std::string describe() const;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct BnParams {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> mean;
  std::vector<float> var;
  float epsilon = 1e-5f;

  static BnParams identity(int channels, float epsilon = 1e-5f);
  int channels() const noexcept { return static_cast<int>(gamma.size()); }
  void validate(int channels) const;
};

// Arithmetic instrumentation. Convolution taps over zero padding count as
// performed work, i.e. the kernels behave as if run on a zero-padded buffer.
struct OpCounter {
  std::uint64_t mul = 0;
  std::uint64_t add = 0;
  std::uint64_t other = 0;  // comparisons (ReLU)

  std::uint64_t flops() const noexcept { return mul + add + other; }
  OpCounter& operator+=(const OpCounter& o) noexcept {
    mul += o.mul;
    add += o.add;
    other += o.other;
    return *this;
  }
};

std::uint64_t mac_count(const ConvSpec& spec, int in_h, int in_w);

// Direct nested-loop cross-correlation. Accumulation order per output pixel:
// input channel, then ky, then kx, bias added last.
Tensor conv2d_ref(const Tensor& x, const WeightArray& w, std::span<const float> bias,
                  const ConvSpec& spec, OpCounter* counter = nullptr);

// Interleaved-layout convolution over a kernel stack packed by pack_kernels.
// Accumulation order per output pixel: ky, kx, input channel.
Tensor conv2d_packed(const Tensor& x, const PackedWeights& w, std::span<const float> bias,
                     const ConvSpec& spec, OpCounter* counter = nullptr);

// Field (i, j) holds the pixels with row = i and col = j (mod d), stored at
// index i * d + j. Requires height and width of at least d.
std::vector<Tensor> split_fields(const Tensor& x, int d);
Tensor merge_fields(const std::vector<Tensor>& fields, int d);

// Stride-1 Same-padded dilated convolution as d*d dense convolutions over the
// pixel fields of the input. The planar overload runs conv2d_ref per field,
// the packed overload runs conv2d_packed on interleaved fields.
Tensor comb_dilated_conv(const Tensor& x, const WeightArray& w, std::span<const float> bias,
                         const ConvSpec& spec, OpCounter* counter = nullptr);
Tensor comb_dilated_conv(const Tensor& x, const PackedWeights& w, std::span<const float> bias,
                         const ConvSpec& spec, OpCounter* counter = nullptr);

// Baseline: kernel expanded to d*(k-1)+1 taps with zeros, then run densely.
WeightArray zero_stuff_kernel(const WeightArray& w, int dilation);
Tensor dilated_conv_zero_stuffed(const Tensor& x, const WeightArray& w,
                                 std::span<const float> bias, const ConvSpec& spec,
                                 OpCounter* counter = nullptr);

struct FoldedConv {
  WeightArray weights;
  std::vector<float> bias;
};

// w'_o = w_o * g_o / sqrt(v_o + eps), b'_o = (b_o - m_o) * g_o / sqrt(v_o + eps) + beta_o.
// An empty bias is treated as zeros.
FoldedConv fold_batchnorm(const WeightArray& w, std::span<const float> bias,
                          const BnParams& bn);

}  // namespace combnet
