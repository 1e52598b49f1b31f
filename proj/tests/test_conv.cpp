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

#include <doctest.h>

#include <random>

#include "combnet/conv.hpp"
#include "combnet/error.hpp"
#include "combnet/ops.hpp"
#include "oracles.hpp"

using namespace combnet;

namespace {

ConvSpec make_spec(int in, int out, int k, int stride, int dil, int groups, bool bias = false,
                   Padding pad = Padding::Same) {
  ConvSpec s;
  s.in_ch = in;
  s.out_ch = out;
  s.kh = s.kw = k;
  s.stride = stride;
  s.dilation = dil;
  s.groups = groups;
  s.has_bias = bias;
  s.padding = pad;
  return s;
}

Tensor ramp(int h, int w) {
  Tensor t = Tensor::planar(1, h, w);
  for (int i = 0; i < h * w; ++i) t.storage()[i] = static_cast<float>(i);
  return t;
}

double oracle_dev(const Tensor& x, const WeightArray& w, const std::vector<float>& b,
                  const ConvSpec& s, const Tensor& got) {
  int oh, ow;
  const auto want = oracle::conv(x.storage(), s.in_ch, x.height(), x.width(), w.data, b,
                                 s.out_ch, s.kh, s.stride, s.pad_h(), s.dilation, s.groups, &oh,
                                 &ow);
  if (oh != got.height() || ow != got.width()) return INFINITY;
  return oracle::max_abs(want, got);
}

}  // namespace

TEST_CASE("all-ones 3x3 kernel on all-ones 3x3 input") {
  const ConvSpec s = make_spec(1, 1, 3, 1, 1, 1);
  WeightArray w(1, 1, 3, 3);
  std::fill(w.data.begin(), w.data.end(), 1.0f);
  Tensor x = Tensor::planar(1, 3, 3);
  std::fill(x.storage().begin(), x.storage().end(), 1.0f);
  const Tensor y = conv2d_ref(x, w, {}, s);
  CHECK(y.at(0, 1, 1) == 9.0f);
  CHECK(y.at(0, 0, 0) == 4.0f);
  CHECK(y.at(0, 0, 2) == 4.0f);
  CHECK(y.at(0, 2, 0) == 4.0f);
  CHECK(y.at(0, 2, 2) == 4.0f);
  CHECK(y.at(0, 0, 1) == 6.0f);
}

TEST_CASE("delta kernel reproduces the input") {
  std::mt19937_64 rng(1);
  const ConvSpec s = make_spec(1, 1, 3, 1, 1, 1);
  WeightArray w(1, 1, 3, 3);
  w.at(0, 0, 1, 1) = 1.0f;
  const Tensor x = oracle::random_tensor(rng, 1, 7, 5);
  CHECK(conv2d_ref(x, w, {}, s) == x);
}

TEST_CASE("grouped strided conv matches the brute-force oracle") {
  std::mt19937_64 rng(2);
  const ConvSpec s = make_spec(4, 8, 3, 2, 1, 2, true);
  const Tensor x = oracle::random_tensor(rng, 4, 9, 8);
  const WeightArray w = oracle::random_weights(rng, s);
  const auto b = oracle::random_vector(rng, 8, -1, 1);
  const Tensor y = conv2d_ref(x, w, b, s);
  CHECK(y.height() == 5);
  CHECK(y.width() == 4);
  CHECK(oracle_dev(x, w, b, s, y) <= 1e-6);
}

TEST_CASE("reference and packed conv match the oracle over random specs") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 2);
  int cases = 0;
  for (int gi = 0; gi < 4; ++gi)
    for (int d = 1; d <= 4; ++d)
      for (int stride = 1; stride <= 2; ++stride)
        for (int rep = 0; rep < 4; ++rep) {
          const int C = (int[]){8, 16, 24}[pick(rng)];
          const int groups = (int[]){1, 4, 8, C}[gi];
          const int out = groups * (1 + pick(rng));
          const int k = (int[]){1, 3, 5}[pick(rng)];
          const Padding pad = rep == 3 ? Padding::Valid : Padding::Same;
          const ConvSpec s = make_spec(C, out, k, stride, d, groups, rep % 2 == 0, pad);
          const int span = d * (k - 1) + 1;
          const int H = std::max(span, 5) + pick(rng) * 3;
          const int W = std::max(span, 5) + pick(rng) * 2;
          const Tensor x = oracle::random_tensor(rng, C, H, W);
          const WeightArray w = oracle::random_weights(rng, s);
          const auto b = s.has_bias ? oracle::random_vector(rng, out, -1, 1) : std::vector<float>{};
          const Tensor ref = conv2d_ref(x, w, b, s);
          REQUIRE(oracle_dev(x, w, b, s, ref) <= 1e-5);
          const Tensor packed = conv2d_packed(to_interleaved(x), pack_kernels(w, groups), b, s);
          CHECK(packed.layout() == Layout::ChannelInterleaved);
          REQUIRE(max_abs_diff(ref, packed) <= 1e-5f);
          ++cases;
        }
  CHECK(cases >= 100);
}

TEST_CASE("channel-wise packed conv equals per-channel 2D filtering") {
  std::mt19937_64 rng(4);
  const int C = 16;
  const ConvSpec s = make_spec(C, C, 3, 1, 1, C);
  const Tensor x = oracle::random_tensor(rng, C, 10, 10);
  const WeightArray w = oracle::random_weights(rng, s);
  const Tensor y = to_planar(conv2d_packed(to_interleaved(x), pack_kernels(w, C), {}, s));
  for (int c = 0; c < C; ++c) {
    std::vector<float> plane(x.storage().begin() + c * 100, x.storage().begin() + (c + 1) * 100);
    std::vector<float> k(w.data.begin() + c * 9, w.data.begin() + (c + 1) * 9);
    int oh, ow;
    const auto want = oracle::conv(plane, 1, 10, 10, k, {}, 1, 3, 1, 1, 1, 1, &oh, &ow);
    for (int i = 0; i < 100; ++i) REQUIRE(std::fabs(want[i] - y.storage()[c * 100 + i]) <= 1e-6);
  }
}

TEST_CASE("zero input gives a bias broadcast") {
  const ConvSpec s = make_spec(8, 8, 3, 1, 2, 4, true);
  std::mt19937_64 rng(5);
  const WeightArray w = oracle::random_weights(rng, s);
  const auto b = oracle::random_vector(rng, 8, -1, 1);
  const Tensor y = to_planar(
      conv2d_packed(Tensor::interleaved(8, 6, 6), pack_kernels(w, 4), b, s));
  for (int c = 0; c < 8; ++c)
    for (int i = 0; i < 36; ++i) REQUIRE(y.storage()[c * 36 + i] == b[c]);
}

TEST_CASE("conv kernels reject mismatched layouts and shapes") {
  const ConvSpec s = make_spec(4, 4, 3, 1, 1, 1);
  const WeightArray w(4, 4, 3, 3);
  CHECK_THROWS_AS(conv2d_ref(Tensor::interleaved(4, 5, 5), w, {}, s), Error);
  CHECK_THROWS_AS(conv2d_packed(Tensor::planar(4, 5, 5), pack_kernels(w, 1), {}, s), Error);
  CHECK_THROWS_AS(conv2d_ref(Tensor::planar(3, 5, 5), w, {}, s), Error);
  ConvSpec bad = s;
  bad.groups = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("conv is linear in the input when bias is zero") {
  std::mt19937_64 rng(6);
  const ConvSpec s = make_spec(8, 8, 3, 1, 2, 4);
  const WeightArray w = oracle::random_weights(rng, s);
  for (int k = 0; k < 5; ++k) {
    const float alpha = std::uniform_real_distribution<float>(-3, 3)(rng);
    const Tensor x = oracle::random_tensor(rng, 8, 7, 7);
    Tensor ax = x;
    for (float& v : ax.storage()) v *= alpha;
    Tensor want = conv2d_ref(x, w, {}, s);
    for (float& v : want.storage()) v *= alpha;
    CHECK(max_abs_diff(conv2d_ref(ax, w, {}, s), want) <= 1e-5f);
  }
}

TEST_CASE("split_fields on a 4x4 ramp") {
  const Tensor x = ramp(4, 4);
  const auto one = split_fields(x, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == x);
  const auto f = split_fields(x, 2);
  REQUIRE(f.size() == 4);
  CHECK(f[0].storage() == std::vector<float>{0, 2, 8, 10});
  CHECK(f[1].storage() == std::vector<float>{1, 3, 9, 11});
  CHECK(f[2].storage() == std::vector<float>{4, 6, 12, 14});
  CHECK(f[3].storage() == std::vector<float>{5, 7, 13, 15});
  CHECK(merge_fields(f, 2) == x);
}

TEST_CASE("split_fields partitions every pixel exactly once") {
  std::mt19937_64 rng(7);
  for (int d = 2; d <= 4; ++d) {
    const int H = 5 + d, W = 9 - d;
    const Tensor x = ramp(H, W);
    const auto f = split_fields(x, d);
    std::vector<int> seen(H * W, 0);
    std::size_t total = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const Tensor& fld = f[i * d + j];
        total += fld.size();
        for (int y = 0; y < fld.height(); ++y)
          for (int xx = 0; xx < fld.width(); ++xx) {
            const int v = static_cast<int>(fld.at(0, y, xx));
            CHECK(v / W % d == i);
            CHECK(v % W % d == j);
            ++seen[v];
          }
      }
    CHECK(total == x.size());
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
}

TEST_CASE("merge_fields inverts split_fields") {
  std::mt19937_64 rng(8);
  for (int d = 1; d <= 4; ++d)
    for (int rep = 0; rep < 5; ++rep) {
      const Tensor x = oracle::random_tensor(rng, 3, d + rep * 2, d + rep);
      CHECK(merge_fields(split_fields(x, d), d) == x);
    }
}

TEST_CASE("single-pixel fields reassemble in every position") {
  for (int d = 1; d <= 4; ++d) {
    const Tensor x = ramp(d, d);
    const auto f = split_fields(x, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        REQUIRE(f[i * d + j].size() == 1);
        CHECK(f[i * d + j].storage()[0] == static_cast<float>(i * d + j));
      }
    CHECK(merge_fields(f, d) == x);
  }
}

TEST_CASE("merge_fields rejects inconsistent fields") {
  auto f = split_fields(ramp(4, 4), 2);
  CHECK_THROWS_AS(merge_fields(f, 3), Error);
  f[3] = Tensor::planar(1, 3, 3);
  CHECK_THROWS_AS(merge_fields(f, 2), Error);
}

TEST_CASE("comb with d=1 is bit-identical to the reference conv") {
  std::mt19937_64 rng(9);
  const ConvSpec s = make_spec(8, 16, 3, 1, 1, 4, true);
  const Tensor x = oracle::random_tensor(rng, 8, 9, 11);
  const WeightArray w = oracle::random_weights(rng, s);
  const auto b = oracle::random_vector(rng, 16, -1, 1);
  CHECK(comb_dilated_conv(x, w, b, s) == conv2d_ref(x, w, b, s));
}

TEST_CASE("comb at d=2 equals the zero-stuffed 5x5 kernel on a ramp") {
  std::mt19937_64 rng(10);
  const ConvSpec s = make_spec(1, 1, 3, 1, 2, 1);
  const WeightArray w = oracle::random_weights(rng, s);
  const Tensor x = ramp(4, 4);
  const WeightArray z = zero_stuff_kernel(w, 2);
  REQUIRE(z.kh == 5);
  for (int y = 0; y < 5; ++y)
    for (int xx = 0; xx < 5; ++xx)
      CHECK(z.at(0, 0, y, xx) == ((y % 2 || xx % 2) ? 0.0f : w.at(0, 0, y / 2, xx / 2)));
  const ConvSpec dense = make_spec(1, 1, 5, 1, 1, 1);
  CHECK(max_abs_diff(comb_dilated_conv(x, w, {}, s), conv2d_ref(x, z, {}, dense)) <= 1e-6f);
}

TEST_CASE("comb matches the reference for d in 1..4 on both layouts") {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 4; ++d)
    for (int groups : {1, 4, 8, 16}) {
      const ConvSpec s = make_spec(16, 16, 3, 1, d, groups, true);
      const Tensor x = oracle::random_tensor(rng, 16, 12, 13);
      const WeightArray w = oracle::random_weights(rng, s);
      const auto b = oracle::random_vector(rng, 16, -1, 1);
      const Tensor ref = conv2d_ref(x, w, b, s);
      CHECK(max_abs_diff(comb_dilated_conv(x, w, b, s), ref) <= 1e-6f);
      CHECK(max_abs_diff(comb_dilated_conv(to_interleaved(x), pack_kernels(w, groups), b, s),
                         ref) <= 1e-5f);
    }
}

TEST_CASE("comb multiply count equals mac_count independent of dilation") {
  std::mt19937_64 rng(12);
  const Tensor x = oracle::random_tensor(rng, 32, 12, 12);
  for (int d = 1; d <= 4; ++d) {
    const ConvSpec s = make_spec(32, 32, 3, 1, d, 8);
    const WeightArray w = oracle::random_weights(rng, s);
    CHECK(mac_count(s, 12, 12) == 165888u);
    OpCounter planar, packed;
    comb_dilated_conv(x, w, {}, s, &planar);
    comb_dilated_conv(to_interleaved(x), pack_kernels(w, 8), {}, s, &packed);
    CHECK(planar.mul == 165888u);
    CHECK(packed.mul == 165888u);
    OpCounter stuffed;
    dilated_conv_zero_stuffed(x, w, {}, s, &stuffed);
    const std::uint64_t span = 2 * d + 1;
    CHECK(stuffed.mul == 12u * 12 * 32 * 4 * span * span);
  }
  OpCounter c;
  dilated_conv_zero_stuffed(x, oracle::random_weights(rng, make_spec(32, 32, 3, 1, 2, 8)), {},
                            make_spec(32, 32, 3, 1, 2, 8), &c);
  CHECK(c.mul == 460800u);
}

TEST_CASE("comb rejects strided or valid-padded specs") {
  const ConvSpec s = make_spec(4, 4, 3, 2, 2, 1);
  try {
    comb_dilated_conv(Tensor::planar(4, 8, 8), WeightArray(4, 4, 3, 3), {}, s);
    FAIL("expected an unsupported-config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsupported);
  }
  CHECK_THROWS_AS(comb_dilated_conv(Tensor::planar(4, 8, 8), WeightArray(4, 4, 3, 3), {},
                                    make_spec(4, 4, 3, 1, 2, 1, false, Padding::Valid)),
                  Error);
}

TEST_CASE("mac_count examples") {
  const ConvSpec s = make_spec(16, 32, 3, 1, 1, 4);
  CHECK(mac_count(s, 24, 24) == 663552u);
  std::mt19937_64 rng(13);
  OpCounter c;
  conv2d_ref(oracle::random_tensor(rng, 16, 24, 24), oracle::random_weights(rng, s), {}, s, &c);
  CHECK(c.mul == 663552u);
  CHECK(c.add == 663552u);
  const ConvSpec dw = make_spec(20, 20, 1, 1, 1, 20);
  CHECK(mac_count(dw, 7, 9) == 7u * 9 * 20);
}

TEST_CASE("fold_batchnorm identity and scaling") {
  std::mt19937_64 rng(14);
  const ConvSpec s = make_spec(4, 4, 3, 1, 1, 1, true);
  const WeightArray w = oracle::random_weights(rng, s);
  const auto b = oracle::random_vector(rng, 4, -1, 1);
  BnParams id = BnParams::identity(4, 0.0f);
  const FoldedConv f = fold_batchnorm(w, b, id);
  CHECK(f.weights == w);
  CHECK(f.bias == b);

  BnParams dbl = BnParams::identity(4, 0.0f);
  std::fill(dbl.gamma.begin(), dbl.gamma.end(), 2.0f);
  const FoldedConv f2 = fold_batchnorm(w, b, dbl);
  for (std::size_t i = 0; i < w.data.size(); ++i) CHECK(f2.weights.data[i] == 2.0f * w.data[i]);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(f2.bias[i] == 2.0f * b[i]);
}

TEST_CASE("fold_batchnorm matches the two-pass pipeline on random draws") {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 50; ++k) {
    const ConvSpec s = make_spec(8, 8, 3, 1, 1 + k % 3, (k % 2) ? 4 : 1, k % 3 == 0);
    const Tensor x = oracle::random_tensor(rng, 8, 8, 8);
    const WeightArray w = oracle::random_weights(rng, s);
    const auto b = s.has_bias ? oracle::random_vector(rng, 8, -1, 1) : std::vector<float>{};
    BnParams bn;
    bn.gamma = oracle::random_vector(rng, 8, 0.5f, 1.5f);
    bn.beta = oracle::random_vector(rng, 8, -0.5f, 0.5f);
    bn.mean = oracle::random_vector(rng, 8, -0.5f, 0.5f);
    bn.var = oracle::random_vector(rng, 8, 0.5f, 1.5f);
    const FoldedConv f = fold_batchnorm(w, b, bn);
    ConvSpec fs = s;
    fs.has_bias = true;
    CHECK(max_abs_diff(batchnorm(conv2d_ref(x, w, b, s), bn), conv2d_ref(x, f.weights, f.bias, fs)) <=
          1e-5f);
  }
}

TEST_CASE("fold_batchnorm rejects length mismatches") {
  BnParams bn = BnParams::identity(3);
  CHECK_THROWS_AS(fold_batchnorm(WeightArray(4, 1, 1, 1), {}, bn), Error);
}

TEST_CASE("relu and nearest upsample") {
  Tensor x({1, 3, 1, 1}, Layout::ChannelPlanar, {-1, 0, 2});
  CHECK(relu(x).storage() == std::vector<float>{0, 0, 2});
  Tensor v({1, 1, 1, 1}, Layout::ChannelPlanar, {7});
  CHECK(upsample_nearest_2x(v).storage() == std::vector<float>{7, 7, 7, 7});
  std::mt19937_64 rng(16);
  for (int k = 0; k < 10; ++k) {
    const Tensor t = oracle::random_tensor(rng, 1 + k % 4, 1 + k, 2 + k % 3);
    const Tensor u = upsample_nearest_2x(t);
    CHECK(u.channels() == t.channels());
    CHECK(u.size() == 4 * t.size());
    CHECK(u.at(0, 2 * (t.height() - 1) + 1, 1) == t.at(0, t.height() - 1, 0));
  }
}
