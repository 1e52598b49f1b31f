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

#include "combnet/ops.hpp"

#include <algorithm>
#include <cmath>

#include "combnet/error.hpp"

namespace combnet {

void relu_inplace(Tensor& x, OpCounter* counter) {
  for (float& v : x.data()) v = std::max(v, 0.0f);
  if (counter) counter->other += x.size();
}

Tensor relu(const Tensor& x, OpCounter* counter) {
  Tensor y = x;
  relu_inplace(y, counter);
  return y;
}

Tensor upsample_nearest_2x(const Tensor& x) {
  Tensor out({x.batch(), x.channels(), 2 * x.height(), 2 * x.width()}, x.layout());
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c)
      for (int y = 0; y < out.height(); ++y)
        for (int xx = 0; xx < out.width(); ++xx) out.at(n, c, y, xx) = x.at(n, c, y / 2, xx / 2);
  return out;
}

Tensor batchnorm(const Tensor& x, const BnParams& bn, OpCounter* counter) {
  bn.validate(x.channels());
  std::vector<float> scale(bn.gamma.size()), shift(bn.gamma.size());
  for (std::size_t c = 0; c < scale.size(); ++c) {
    const double s = static_cast<double>(bn.gamma[c]) /
                     std::sqrt(static_cast<double>(bn.var[c]) + bn.epsilon);
    scale[c] = static_cast<float>(s);
    shift[c] = static_cast<float>(bn.beta[c] - bn.mean[c] * s);
  }
  Tensor y(x.shape(), x.layout());
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c)
      for (int yy = 0; yy < x.height(); ++yy)
        for (int xx = 0; xx < x.width(); ++xx)
          y.at(n, c, yy, xx) = x.at(n, c, yy, xx) * scale[c] + shift[c];
  if (counter) {
    counter->mul += x.size();
    counter->add += x.size();
  }
  return y;
}

Tensor add(const Tensor& a, const Tensor& b, OpCounter* counter) {
  require(a.shape() == b.shape() && a.layout() == b.layout(), ErrorCode::ShapeMismatch,
          "add: operand shapes or layouts differ");
  Tensor y = a;
  auto yd = y.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += bd[i];
  if (counter) counter->add += y.size();
  return y;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  require(!parts.empty(), ErrorCode::InvalidArgument, "concat of zero tensors");
  const Tensor& p0 = parts.front();
  int channels = 0;
  for (const Tensor& p : parts) {
    require(p.batch() == p0.batch() && p.height() == p0.height() && p.width() == p0.width() &&
                p.layout() == p0.layout(),
            ErrorCode::ShapeMismatch, "concat: spatial dims or layouts differ");
    channels += p.channels();
  }
  Tensor out({p0.batch(), channels, p0.height(), p0.width()}, p0.layout());
  int base = 0;
  for (const Tensor& p : parts) {
    for (int n = 0; n < p.batch(); ++n)
      for (int c = 0; c < p.channels(); ++c)
        for (int y = 0; y < p.height(); ++y)
          for (int x = 0; x < p.width(); ++x) out.at(n, base + c, y, x) = p.at(n, c, y, x);
    base += p.channels();
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x, OpCounter* counter) {
  Tensor out({x.batch(), x.channels(), 1, 1}, x.layout());
  const float inv = 1.0f / static_cast<float>(x.height() * x.width());
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c) {
      float sum = 0.0f;
      for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx) sum += x.at(n, c, y, xx);
      out.at(n, c, 0, 0) = sum * inv;
    }
  if (counter) {
    counter->add += x.size();
    counter->mul += static_cast<std::uint64_t>(x.batch()) * x.channels();
  }
  return out;
}

}  // namespace combnet
