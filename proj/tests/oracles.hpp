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

// Independent reference implementations used as test oracles. Written
// directly from the defining formulas, sharing no code with the library
// kernels beyond the container types.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "combnet/conv.hpp"
#include "combnet/tensor.hpp"

namespace oracle {

using combnet::ConvSpec;
using combnet::Tensor;
using combnet::WeightArray;

inline std::size_t planar_index(int C, int H, int W, int c, int y, int x) {
  (void)C;
  return (static_cast<std::size_t>(c) * H + y) * W + x;
}

inline std::size_t interleaved_index(int C, int H, int W, int c, int y, int x) {
  (void)H;
  return (static_cast<std::size_t>(y) * W + x) * C + c;
}

// Brute-force grouped, strided, dilated cross-correlation on raw planar
// buffers, accumulated in double.
inline std::vector<double> conv(const std::vector<float>& in, int C, int H, int W,
                                const std::vector<float>& w, const std::vector<float>& bias,
                                int O, int K, int stride, int pad, int dil, int groups,
                                int* out_h, int* out_w) {
  const int OH = (H + 2 * pad - dil * (K - 1) - 1) / stride + 1;
  const int OW = (W + 2 * pad - dil * (K - 1) - 1) / stride + 1;
  const int icg = C / groups, ocg = O / groups;
  std::vector<double> out(static_cast<std::size_t>(O) * OH * OW, 0.0);
  for (int o = 0; o < O; ++o) {
    const int g = o / ocg;
    for (int oy = 0; oy < OH; ++oy)
      for (int ox = 0; ox < OW; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[o];
        for (int i = 0; i < icg; ++i)
          for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx) {
              const int iy = oy * stride - pad + ky * dil;
              const int ix = ox * stride - pad + kx * dil;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              const int c = g * icg + i;
              acc += static_cast<double>(in[(static_cast<std::size_t>(c) * H + iy) * W + ix]) *
                     w[((static_cast<std::size_t>(o) * icg + i) * K + ky) * K + kx];
            }
        out[(static_cast<std::size_t>(o) * OH + oy) * OW + ox] = acc;
      }
  }
  *out_h = OH;
  *out_w = OW;
  return out;
}

inline double max_abs(const std::vector<double>& a, const Tensor& t) {
  const Tensor p = combnet::with_layout(t, combnet::Layout::ChannelPlanar);
  if (a.size() != p.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - p.storage()[i]));
  return m;
}

inline double log_sum_exp(const std::vector<double>& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

inline Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w, float lo = -1.0f,
                            float hi = 1.0f) {
  std::uniform_real_distribution<float> d(lo, hi);
  Tensor t = Tensor::planar(c, h, w);
  for (float& v : t.storage()) v = d(rng);
  return t;
}

inline WeightArray random_weights(std::mt19937_64& rng, const ConvSpec& s) {
  const float scale = 1.0f / std::sqrt(static_cast<float>(s.in_per_group() * s.kh * s.kw));
  std::uniform_real_distribution<float> d(-scale, scale);
  WeightArray w(s.out_ch, s.in_per_group(), s.kh, s.kw);
  for (float& v : w.data) v = d(rng);
  return w;
}

inline std::vector<float> random_vector(std::mt19937_64& rng, int n, float lo, float hi) {
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (float& x : v) x = d(rng);
  return v;
}

}  // namespace oracle
