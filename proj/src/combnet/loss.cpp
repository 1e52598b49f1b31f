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

#include "combnet/loss.hpp"

#include <algorithm>
#include <cmath>

#include "combnet/error.hpp"

namespace combnet {

LogitMaps LogitMaps::from_tensor(const Tensor& t) {
  const Tensor p = with_layout(t, Layout::ChannelPlanar);
  require(p.batch() == 1, ErrorCode::ShapeMismatch, "logit maps must have batch 1");
  LogitMaps m;
  m.maps = p.channels();
  m.h = p.height();
  m.w = p.width();
  m.data.assign(p.storage().begin(), p.storage().end());
  return m;
}

LogitMaps LogitMaps::uniform(int maps, int h, int w, double value) {
  LogitMaps m;
  m.maps = maps;
  m.h = h;
  m.w = w;
  m.data.assign(static_cast<std::size_t>(maps) * h * w, value);
  return m;
}

KeypointTargets KeypointTargets::downscaled(int factor) const {
  require(factor >= 1, ErrorCode::InvalidArgument, "downscale factor must be >= 1");
  KeypointTargets t = *this;
  for (auto& p : t.points) {
    p.row /= factor;
    p.col /= factor;
  }
  return t;
}

namespace {

// log(sum(exp(z))) over [begin, begin + n) and the softmax into `p`.
double log_softmax_into(const double* z, std::size_t n, double* p) {
  const double m = *std::max_element(z, z + n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(z[i] - m);
    s += p[i];
  }
  for (std::size_t i = 0; i < n; ++i) p[i] /= s;
  return m + std::log(s);
}

}  // namespace

LossGrad keypoint_ce(const LogitMaps& logits, const KeypointTargets& targets) {
  require(logits.data.size() == static_cast<std::size_t>(logits.maps) * logits.plane(),
          ErrorCode::ShapeMismatch, "logit map data length does not match dims");
  require(targets.points.size() == static_cast<std::size_t>(logits.maps),
          ErrorCode::ShapeMismatch, "one keypoint target per map required");
  require(targets.fingertip.empty() || targets.fingertip.size() == targets.points.size(),
          ErrorCode::ShapeMismatch, "fingertip flags must match keypoint count");

  LossGrad r;
  r.grad.assign(logits.data.size(), 0.0);
  int visible = 0;
  for (const auto& p : targets.points) {
    if (!p.visible) continue;
    require(p.row >= 0 && p.row < logits.h && p.col >= 0 && p.col < logits.w,
            ErrorCode::InvalidArgument,
            "keypoint target (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                ") outside " + std::to_string(logits.h) + "x" + std::to_string(logits.w) +
                " map");
    ++visible;
  }
  if (visible == 0) return r;

  const std::size_t plane = logits.plane();
  double sum = 0.0;
  for (int k = 0; k < logits.maps; ++k) {
    const KeypointLabel& p = targets.points[k];
    if (!p.visible) continue;
    const double weight = !targets.fingertip.empty() && targets.fingertip[k] ? 2.0 : 1.0;
    const double* z = logits.data.data() + k * plane;
    double* g = r.grad.data() + k * plane;
    const std::size_t t = static_cast<std::size_t>(p.row) * logits.w + p.col;
    const double lse = log_softmax_into(z, plane, g);
    sum += weight * (lse - z[t]);
    g[t] -= 1.0;
    for (std::size_t i = 0; i < plane; ++i) g[i] *= weight / visible;
  }
  r.loss = sum / visible;
  return r;
}

LossGrad aux_keypoint_ce(const LogitMaps& logits, const KeypointTargets& targets) {
  return keypoint_ce(logits, targets);
}

LossGrad visibility_bce(const std::vector<double>& logits, const std::vector<bool>& labels) {
  require(logits.size() == labels.size() && !logits.empty(), ErrorCode::ShapeMismatch,
          "visibility logits and labels must have equal non-zero length");
  LossGrad r;
  r.grad.resize(logits.size());
  const double n = static_cast<double>(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = labels[i] ? 1.0 : 0.0;
    sum += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
    const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    r.grad[i] = (s - y) / n;
  }
  r.loss = sum / n;
  return r;
}

LossGrad orientation_ce_soft(const std::vector<double>& logits, int classes,
                             const HandLabels& labels, double eps) {
  require(classes >= 1 && logits.size() == 2 * static_cast<std::size_t>(classes),
          ErrorCode::ShapeMismatch, "expected 2 x classes logits");
  require(eps >= 0.0 && eps < 1.0, ErrorCode::InvalidArgument, "eps must be in [0, 1)");
  LossGrad r;
  r.grad.assign(logits.size(), 0.0);
  int present = 0;
  for (int h = 0; h < 2; ++h) {
    if (!labels.present[h]) continue;
    require(labels.cls[h] >= 0 && labels.cls[h] < classes, ErrorCode::InvalidArgument,
            "class label " + std::to_string(labels.cls[h]) + " out of range");
    ++present;
  }
  if (present == 0) return r;
  double sum = 0.0;
  for (int h = 0; h < 2; ++h) {
    if (!labels.present[h]) continue;
    const double* z = logits.data() + h * classes;
    double* g = r.grad.data() + h * classes;
    const double lse = log_softmax_into(z, classes, g);
    for (int c = 0; c < classes; ++c) {
      const double q = (c == labels.cls[h] ? 1.0 - eps : 0.0) + eps / classes;
      sum += q * (lse - z[c]);
      g[c] = (g[c] - q) / present;
    }
  }
  r.loss = sum / present;
  return r;
}

LossGrad handpose_ce(const std::vector<double>& logits, int classes, const HandLabels& labels) {
  return orientation_ce_soft(logits, classes, labels, 0.0);
}

LossGrad seg_ce(const LogitMaps& logits, const std::vector<int>& labels) {
  const std::size_t plane = logits.plane();
  require(logits.data.size() == logits.maps * plane && labels.size() == plane,
          ErrorCode::ShapeMismatch, "segmentation logits and label map shapes differ");
  LossGrad r;
  r.grad.assign(logits.data.size(), 0.0);
  std::vector<double> z(logits.maps), p(logits.maps);
  double sum = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    const int y = labels[i];
    require(y >= 0 && y < logits.maps, ErrorCode::InvalidArgument,
            "segmentation label " + std::to_string(y) + " out of range");
    for (int c = 0; c < logits.maps; ++c) z[c] = logits.data[c * plane + i];
    const double lse = log_softmax_into(z.data(), z.size(), p.data());
    sum += lse - z[y];
    for (int c = 0; c < logits.maps; ++c)
      r.grad[c * plane + i] = (p[c] - (c == y ? 1.0 : 0.0)) / static_cast<double>(plane);
  }
  r.loss = sum / static_cast<double>(plane);
  return r;
}

MultiScaleLoss deep_supervision_loss(const std::vector<LogitMaps>& scales,
                                     const KeypointTargets& input_targets, int input_h,
                                     int input_w) {
  require(scales.size() == 3, ErrorCode::ShapeMismatch,
          "deep supervision expects maps at three scales");
  static constexpr int kFactors[3] = {8, 4, 2};
  MultiScaleLoss r;
  for (int s = 0; s < 3; ++s) {
    const int f = kFactors[s];
    require(scales[s].h * f == input_h && scales[s].w * f == input_w, ErrorCode::ShapeMismatch,
            "deep supervision scale " + std::to_string(s) + " must be 1/" + std::to_string(f) +
                " of the input resolution");
    LossGrad lg = keypoint_ce(scales[s], input_targets.downscaled(f));
    r.loss += lg.loss;
    r.grads.push_back(std::move(lg.grad));
  }
  return r;
}

double total_loss(const LossBundle& b) {
  const double terms[7] = {b.kp, b.akp, b.kphv, b.cho, b.dhp, b.seg, b.ds};
  for (double t : terms)
    require(std::isfinite(t), ErrorCode::NonFinite, "non-finite task loss in bundle");
  const LossWeights& w = b.weights;
  return w.kp * b.kp + w.akp * b.akp + w.kphv * b.kphv + w.cho * b.cho + w.dhp * b.dhp +
         w.seg * b.seg + w.ds * b.ds;
}

}  // namespace combnet
