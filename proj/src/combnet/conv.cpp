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

#include "combnet/conv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "combnet/error.hpp"

namespace combnet {

void ConvSpec::validate() const {
  require(in_ch >= 1 && out_ch >= 1, ErrorCode::Config, "conv channels must be positive");
  require(kh >= 1 && kw >= 1, ErrorCode::Config, "conv kernel dims must be positive");
  require(stride >= 1, ErrorCode::Config, "conv stride must be >= 1");
  require(dilation >= 1, ErrorCode::Config, "conv dilation must be >= 1");
  require(groups >= 1 && in_ch % groups == 0 && out_ch % groups == 0, ErrorCode::Config,
          "conv groups (" + std::to_string(groups) + ") must divide in_ch (" +
              std::to_string(in_ch) + ") and out_ch (" + std::to_string(out_ch) + ")");
}

std::string ConvSpec::describe() const {
  std::ostringstream os;
  os << kh << "x" << kw << " " << in_ch << "->" << out_ch;
  if (groups != 1) os << " g" << groups;
  if (stride != 1) os << " s" << stride;
  if (dilation != 1) os << " d" << dilation;
  if (padding == Padding::Valid) os << " valid";
  return os.str();
}

BnParams BnParams::identity(int channels, float epsilon) {
  BnParams bn;
  bn.gamma.assign(channels, 1.0f);
  bn.beta.assign(channels, 0.0f);
  bn.mean.assign(channels, 0.0f);
  bn.var.assign(channels, 1.0f);
  bn.epsilon = epsilon;
  return bn;
}

void BnParams::validate(int channels) const {
  const auto n = static_cast<std::size_t>(channels);
  require(gamma.size() == n && beta.size() == n && mean.size() == n && var.size() == n,
          ErrorCode::ShapeMismatch,
          "batchnorm arrays must have length " + std::to_string(channels));
  require(epsilon >= 0.0f, ErrorCode::InvalidArgument, "batchnorm epsilon must be >= 0");
  for (float v : var) {
    require(v >= 0.0f, ErrorCode::InvalidArgument, "batchnorm running_var must be >= 0");
    require(v + epsilon > 0.0f, ErrorCode::InvalidArgument,
            "batchnorm running_var + epsilon must be positive");
  }
}

std::uint64_t mac_count(const ConvSpec& spec, int in_h, int in_w) {
  spec.validate();
  const int oh = spec.out_h(in_h);
  const int ow = spec.out_w(in_w);
  require(oh >= 1 && ow >= 1, ErrorCode::ShapeMismatch, "conv output would be empty");
  return static_cast<std::uint64_t>(oh) * ow * spec.out_ch * spec.in_per_group() * spec.kh *
         spec.kw;
}

namespace {

void check_bias(std::span<const float> bias, const ConvSpec& spec) {
  if (spec.has_bias) {
    require(bias.size() == static_cast<std::size_t>(spec.out_ch), ErrorCode::ShapeMismatch,
            "bias length must equal out_ch");
  } else {
    require(bias.empty(), ErrorCode::ShapeMismatch, "bias given for a conv without bias");
  }
}

void check_input(const Tensor& x, const ConvSpec& spec) {
  spec.validate();
  require(x.channels() == spec.in_ch, ErrorCode::ShapeMismatch,
          "conv input has " + std::to_string(x.channels()) + " channels, spec expects " +
              std::to_string(spec.in_ch));
  require(spec.out_h(x.height()) >= 1 && spec.out_w(x.width()) >= 1, ErrorCode::ShapeMismatch,
          "conv output would be empty for input " + std::to_string(x.height()) + "x" +
              std::to_string(x.width()));
}

}  // namespace

Tensor conv2d_ref(const Tensor& x, const WeightArray& w, std::span<const float> bias,
                  const ConvSpec& spec, OpCounter* counter) {
  require(x.layout() == Layout::ChannelPlanar, ErrorCode::LayoutMismatch,
          "conv2d_ref expects a planar tensor");
  check_input(x, spec);
  check_bias(bias, spec);
  require(w.out_ch == spec.out_ch && w.in_per_group == spec.in_per_group() &&
              w.kh == spec.kh && w.kw == spec.kw && w.data.size() == w.count(),
          ErrorCode::ShapeMismatch, "weight dims inconsistent with conv spec");

  const int H = x.height(), W = x.width();
  const int oh = spec.out_h(H), ow = spec.out_w(W);
  const int ph = spec.pad_h(), pw = spec.pad_w();
  const int icg = spec.in_per_group(), ocg = spec.filters_per_group();
  Tensor out({x.batch(), spec.out_ch, oh, ow}, Layout::ChannelPlanar);

  std::uint64_t taps = 0, bias_adds = 0;
  for (int n = 0; n < x.batch(); ++n) {
    for (int oc = 0; oc < spec.out_ch; ++oc) {
      const int g = oc / ocg;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          float acc = 0.0f;
          for (int i = 0; i < icg; ++i) {
            const int ic = g * icg + i;
            for (int ky = 0; ky < spec.kh; ++ky) {
              const int iy = oy * spec.stride + ky * spec.dilation - ph;
              for (int kx = 0; kx < spec.kw; ++kx) {
                const int ix = ox * spec.stride + kx * spec.dilation - pw;
                const bool inside = iy >= 0 && iy < H && ix >= 0 && ix < W;
                const float v = inside ? x.at(n, ic, iy, ix) : 0.0f;
                acc += w.at(oc, i, ky, kx) * v;
                ++taps;
              }
            }
          }
          if (spec.has_bias) {
            acc += bias[oc];
            ++bias_adds;
          }
          out.at(n, oc, oy, ox) = acc;
        }
      }
    }
  }
  if (counter) {
    counter->mul += taps;
    counter->add += taps + bias_adds;
  }
  return out;
}

namespace {

constexpr int kMaxLane = 64;

// acc[l] += sum over taps of input[i] * w[l]; w advances by `width` per input
// channel. Fixed-width instantiations let the compiler keep acc in registers.
template <int L>
inline void dot_block(const float* in, int icg, const float*& wp, float* acc) {
  for (int i = 0; i < icg; ++i) {
    const float v = in[i];
    for (int l = 0; l < L; ++l) acc[l] += v * wp[l];
    wp += L;
  }
}

inline void dot_block_n(const float* in, int icg, const float*& wp, float* acc, int width) {
  for (int i = 0; i < icg; ++i) {
    const float v = in[i];
    for (int l = 0; l < width; ++l) acc[l] += v * wp[l];
    wp += width;
  }
}

}  // namespace

Tensor conv2d_packed(const Tensor& x, const PackedWeights& w, std::span<const float> bias,
                     const ConvSpec& spec, OpCounter* counter) {
  require(x.layout() == Layout::ChannelInterleaved, ErrorCode::LayoutMismatch,
          "conv2d_packed expects an interleaved tensor");
  check_input(x, spec);
  check_bias(bias, spec);
  require(w.out_ch == spec.out_ch && w.in_per_group == spec.in_per_group() &&
              w.kh == spec.kh && w.kw == spec.kw && w.groups == spec.groups,
          ErrorCode::ShapeMismatch, "packed weights inconsistent with conv spec");
  require(w.data.size() ==
              static_cast<std::size_t>(w.out_ch) * w.in_per_group * w.kh * w.kw,
          ErrorCode::ShapeMismatch, "packed weight data length does not match dims");
  require(w.lane_width >= 1 && w.lane_width <= kMaxLane, ErrorCode::Unsupported,
          "lane width must be in [1, 64]");

  const int N = x.batch(), H = x.height(), W = x.width(), C = x.channels();
  const int ph = spec.pad_h(), pw = spec.pad_w();
  const int oh = spec.out_h(H), ow = spec.out_w(W);
  const int icg = spec.in_per_group(), ocg = spec.filters_per_group();
  const int lane = w.lane_width;
  const int taps_per_filter = spec.kh * spec.kw * icg;

  // Zero-padded interleaved copy so the inner loops are branch-free.
  const int Hp = H + 2 * ph, Wp = W + 2 * pw;
  std::vector<float> padded;
  const float* src = x.data().data();
  if (ph != 0 || pw != 0) {
    padded.assign(static_cast<std::size_t>(N) * Hp * Wp * C, 0.0f);
    for (int n = 0; n < N; ++n)
      for (int y = 0; y < H; ++y) {
        const float* row = src + (static_cast<std::size_t>(n) * H + y) * W * C;
        float* dst = padded.data() + ((static_cast<std::size_t>(n) * Hp + y + ph) * Wp + pw) * C;
        std::copy(row, row + static_cast<std::size_t>(W) * C, dst);
      }
    src = padded.data();
  }

  Tensor out({N, spec.out_ch, oh, ow}, Layout::ChannelInterleaved);
  float* dst = out.data().data();
  std::array<float, kMaxLane> acc{};
  std::uint64_t macs = 0;

  for (int n = 0; n < N; ++n) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float* o = dst + ((static_cast<std::size_t>(n) * oh + oy) * ow + ox) * spec.out_ch;
        for (int g = 0; g < spec.groups; ++g) {
          const float* wg = w.data.data() + static_cast<std::size_t>(g) * ocg * taps_per_filter;
          for (int b0 = 0; b0 < ocg; b0 += lane) {
            const int bw = std::min(lane, ocg - b0);
            const float* wp = wg + static_cast<std::size_t>(b0) * taps_per_filter;
            std::fill(acc.begin(), acc.begin() + bw, 0.0f);
            for (int ky = 0; ky < spec.kh; ++ky) {
              const int iy = oy * spec.stride + ky * spec.dilation;
              for (int kx = 0; kx < spec.kw; ++kx) {
                const int ix = ox * spec.stride + kx * spec.dilation;
                const float* ip =
                    src + ((static_cast<std::size_t>(n) * Hp + iy) * Wp + ix) * C + g * icg;
                switch (bw) {
                  case 4: dot_block<4>(ip, icg, wp, acc.data()); break;
                  case 8: dot_block<8>(ip, icg, wp, acc.data()); break;
                  case 1: dot_block<1>(ip, icg, wp, acc.data()); break;
                  default: dot_block_n(ip, icg, wp, acc.data(), bw); break;
                }
              }
            }
            macs += static_cast<std::uint64_t>(bw) * taps_per_filter;
            float* ob = o + g * ocg + b0;
            if (spec.has_bias) {
              for (int l = 0; l < bw; ++l) ob[l] = acc[l] + bias[g * ocg + b0 + l];
            } else {
              for (int l = 0; l < bw; ++l) ob[l] = acc[l];
            }
          }
        }
      }
    }
  }
  if (counter) {
    counter->mul += macs;
    counter->add += macs + (spec.has_bias ? out.size() : 0);
  }
  return out;
}

std::vector<Tensor> split_fields(const Tensor& x, int d) {
  require(d >= 1, ErrorCode::InvalidArgument, "field factor must be >= 1");
  require(x.height() >= d && x.width() >= d, ErrorCode::ShapeMismatch,
          "split_fields needs height and width of at least d");
  std::vector<Tensor> fields;
  fields.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    const int fh = (x.height() - i + d - 1) / d;
    for (int j = 0; j < d; ++j) {
      const int fw = (x.width() - j + d - 1) / d;
      Tensor f({x.batch(), x.channels(), fh, fw}, x.layout());
      for (int n = 0; n < x.batch(); ++n)
        for (int c = 0; c < x.channels(); ++c)
          for (int y = 0; y < fh; ++y)
            for (int xx = 0; xx < fw; ++xx) f.at(n, c, y, xx) = x.at(n, c, y * d + i, xx * d + j);
      fields.push_back(std::move(f));
    }
  }
  return fields;
}

Tensor merge_fields(const std::vector<Tensor>& fields, int d) {
  require(d >= 1, ErrorCode::InvalidArgument, "field factor must be >= 1");
  require(fields.size() == static_cast<std::size_t>(d) * d, ErrorCode::ShapeMismatch,
          "merge_fields expects d*d fields");
  int H = 0, W = 0;
  for (int i = 0; i < d; ++i) H += fields[static_cast<std::size_t>(i) * d].height();
  for (int j = 0; j < d; ++j) W += fields[static_cast<std::size_t>(j)].width();
  const Tensor& f0 = fields.front();
  require(H >= d && W >= d, ErrorCode::ShapeMismatch, "inconsistent field shapes");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const Tensor& f = fields[static_cast<std::size_t>(i) * d + j];
      require(f.height() == (H - i + d - 1) / d && f.width() == (W - j + d - 1) / d &&
                  f.channels() == f0.channels() && f.batch() == f0.batch() &&
                  f.layout() == f0.layout(),
              ErrorCode::ShapeMismatch, "inconsistent field shapes");
    }

  Tensor out({f0.batch(), f0.channels(), H, W}, f0.layout());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const Tensor& f = fields[static_cast<std::size_t>(i) * d + j];
      for (int n = 0; n < f.batch(); ++n)
        for (int c = 0; c < f.channels(); ++c)
          for (int y = 0; y < f.height(); ++y)
            for (int xx = 0; xx < f.width(); ++xx)
              out.at(n, c, y * d + i, xx * d + j) = f.at(n, c, y, xx);
    }
  return out;
}

namespace {

ConvSpec dense_field_spec(const ConvSpec& spec) {
  spec.validate();
  require(spec.stride == 1, ErrorCode::Unsupported, "comb dilated conv requires stride 1");
  require(spec.padding == Padding::Same, ErrorCode::Unsupported,
          "comb dilated conv requires Same padding");
  require(spec.kh % 2 == 1 && spec.kw % 2 == 1, ErrorCode::Unsupported,
          "comb dilated conv requires odd kernel sizes");
  ConvSpec dense = spec;
  dense.dilation = 1;
  return dense;
}

template <typename Weights, typename DenseConv>
Tensor comb_impl(const Tensor& x, const Weights& w, std::span<const float> bias,
                 const ConvSpec& spec, OpCounter* counter, DenseConv&& dense_conv) {
  const ConvSpec dense = dense_field_spec(spec);
  const int d = spec.dilation;
  if (d == 1) return dense_conv(x, w, bias, dense, counter);
  std::vector<Tensor> fields = split_fields(x, d);
  for (Tensor& f : fields) f = dense_conv(f, w, bias, dense, counter);
  return merge_fields(fields, d);
}

}  // namespace

Tensor comb_dilated_conv(const Tensor& x, const WeightArray& w, std::span<const float> bias,
                         const ConvSpec& spec, OpCounter* counter) {
  require(x.layout() == Layout::ChannelPlanar, ErrorCode::LayoutMismatch,
          "comb_dilated_conv with unpacked weights expects a planar tensor");
  return comb_impl(x, w, bias, spec, counter,
                   [](const Tensor& t, const WeightArray& wa, std::span<const float> b,
                      const ConvSpec& s, OpCounter* c) { return conv2d_ref(t, wa, b, s, c); });
}

Tensor comb_dilated_conv(const Tensor& x, const PackedWeights& w, std::span<const float> bias,
                         const ConvSpec& spec, OpCounter* counter) {
  require(x.layout() == Layout::ChannelInterleaved, ErrorCode::LayoutMismatch,
          "comb_dilated_conv with packed weights expects an interleaved tensor");
  return comb_impl(x, w, bias, spec, counter,
                   [](const Tensor& t, const PackedWeights& pw, std::span<const float> b,
                      const ConvSpec& s, OpCounter* c) { return conv2d_packed(t, pw, b, s, c); });
}

WeightArray zero_stuff_kernel(const WeightArray& w, int dilation) {
  require(dilation >= 1, ErrorCode::InvalidArgument, "dilation must be >= 1");
  WeightArray out(w.out_ch, w.in_per_group, dilation * (w.kh - 1) + 1,
                  dilation * (w.kw - 1) + 1);
  for (int o = 0; o < w.out_ch; ++o)
    for (int i = 0; i < w.in_per_group; ++i)
      for (int y = 0; y < w.kh; ++y)
        for (int x = 0; x < w.kw; ++x) out.at(o, i, y * dilation, x * dilation) = w.at(o, i, y, x);
  return out;
}

Tensor dilated_conv_zero_stuffed(const Tensor& x, const WeightArray& w,
                                 std::span<const float> bias, const ConvSpec& spec,
                                 OpCounter* counter) {
  spec.validate();
  ConvSpec stuffed = spec;
  stuffed.kh = spec.dilation * (spec.kh - 1) + 1;
  stuffed.kw = spec.dilation * (spec.kw - 1) + 1;
  stuffed.dilation = 1;
  return conv2d_ref(x, zero_stuff_kernel(w, spec.dilation), bias, stuffed, counter);
}

FoldedConv fold_batchnorm(const WeightArray& w, std::span<const float> bias, const BnParams& bn) {
  bn.validate(w.out_ch);
  require(bias.empty() || bias.size() == static_cast<std::size_t>(w.out_ch),
          ErrorCode::ShapeMismatch, "bias length must equal out_ch");
  FoldedConv f{w, std::vector<float>(static_cast<std::size_t>(w.out_ch))};
  const std::size_t per_filter = static_cast<std::size_t>(w.in_per_group) * w.kh * w.kw;
  for (int o = 0; o < w.out_ch; ++o) {
    const double scale =
        static_cast<double>(bn.gamma[o]) / std::sqrt(static_cast<double>(bn.var[o]) + bn.epsilon);
    for (std::size_t k = 0; k < per_filter; ++k) {
      float& v = f.weights.data[o * per_filter + k];
      v = static_cast<float>(v * scale);
    }
    const double b = bias.empty() ? 0.0 : bias[o];
    f.bias[o] = static_cast<float>((b - bn.mean[o]) * scale + bn.beta[o]);
  }
  return f;
}

}  // namespace combnet
