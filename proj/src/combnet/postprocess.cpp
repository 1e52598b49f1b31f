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

#include "combnet/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "combnet/error.hpp"

namespace combnet {

double sigmoid(double x) noexcept {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Image16 amplitude_from_phases(const PhaseFrame& f, const std::array<float, 4>& coeffs) {
  for (float c : coeffs)
    require(std::isfinite(c), ErrorCode::InvalidArgument, "amplitude coefficients must be finite");
  const Image16& p0 = f.phases[0];
  require(!p0.empty(), ErrorCode::InvalidArgument, "phase images are empty");
  for (const Image16& p : f.phases)
    require(p.h == p0.h && p.w == p0.w && p.pixels.size() == p0.pixels.size(),
            ErrorCode::ShapeMismatch, "phase images differ in size");
  Image16 out(p0.h, p0.w);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += static_cast<double>(coeffs[k]) * f.phases[k].pixels[i];
    s = std::clamp(s, 0.0, 65535.0);
    out.pixels[i] = static_cast<std::uint16_t>(std::lround(s));
  }
  return out;
}

NormalizedInput normalize_input(const Image16& image, int out_h, int out_w) {
  require(!image.empty() && image.h >= 1 && image.w >= 1, ErrorCode::InvalidArgument,
          "input image is empty");
  require(out_h >= 1 && out_w >= 1, ErrorCode::InvalidArgument, "bad output resolution");
  CropTransform t;
  t.out_h = out_h;
  t.out_w = out_w;
  // Largest centered window with aspect out_w : out_h.
  if (static_cast<long long>(image.w) * out_h >= static_cast<long long>(image.h) * out_w) {
    t.crop_h = image.h;
    t.crop_w = static_cast<int>(static_cast<long long>(image.h) * out_w / out_h);
  } else {
    t.crop_w = image.w;
    t.crop_h = static_cast<int>(static_cast<long long>(image.w) * out_h / out_w);
  }
  t.crop_w = std::max(t.crop_w, 1);
  t.crop_h = std::max(t.crop_h, 1);
  t.x0 = (image.w - t.crop_w) / 2;
  t.y0 = (image.h - t.crop_h) / 2;

  NormalizedInput r{Tensor::planar(1, out_h, out_w), t};
  for (int y = 0; y < out_h; ++y) {
    const int sy = t.y0 + static_cast<int>(static_cast<long long>(y) * t.crop_h / out_h);
    for (int x = 0; x < out_w; ++x) {
      const int sx = t.x0 + static_cast<int>(static_cast<long long>(x) * t.crop_w / out_w);
      r.tensor.at(0, y, x) = static_cast<float>(image.at(sy, sx) / 65535.0);
    }
  }
  return r;
}

Image16 denormalize(const Tensor& t) {
  require(t.channels() == 1 && t.batch() == 1, ErrorCode::ShapeMismatch,
          "denormalize expects a 1 x H x W tensor");
  Image16 img(t.height(), t.width());
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const double v = std::clamp(static_cast<double>(t.at(0, y, x)), 0.0, 1.0);
      img.at(y, x) = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
  return img;
}

std::vector<DecodedKeypoint> decode_heatmaps(const Tensor& heatmaps, int input_h, int input_w,
                                             double conf_threshold) {
  const Tensor hm = with_layout(heatmaps, Layout::ChannelPlanar);
  const int h = hm.height();
  const int w = hm.width();
  require(h >= 1 && w >= 1, ErrorCode::InvalidArgument, "empty heatmap");
  const double sx = static_cast<double>(input_w) / w;
  const double sy = static_cast<double>(input_h) / h;
  std::vector<DecodedKeypoint> out;
  for (int k = 0; k < hm.channels(); ++k) {
    int best = 0;
    float m = hm.at(k, 0, 0);
    for (int i = 1; i < h * w; ++i) {
      const float z = hm.at(k, i / w, i % w);
      if (z > m) {
        m = z;
        best = i;
      }
    }
    double s = 0.0;
    for (int i = 0; i < h * w; ++i) s += std::exp(static_cast<double>(hm.at(k, i / w, i % w)) - m);
    DecodedKeypoint d;
    d.row = best / w;
    d.col = best % w;
    d.u = (d.col + 0.5) * sx;
    d.v = (d.row + 0.5) * sy;
    d.confidence = 1.0 / s;
    d.confident = d.confidence >= conf_threshold;
    out.push_back(d);
  }
  return out;
}

FrameResult gate_visibility(const std::vector<DecodedKeypoint>& kps,
                            const std::vector<float>& vis_logits, double kp_threshold,
                            double hand_threshold) {
  require(kp_threshold > 0.0 && kp_threshold < 1.0 && hand_threshold > 0.0 &&
              hand_threshold < 1.0,
          ErrorCode::InvalidArgument, "visibility thresholds must lie in (0, 1)");
  require(kps.size() % 2 == 0 && vis_logits.size() == kps.size() + 2, ErrorCode::ShapeMismatch,
          "expected one visibility logit per keypoint plus two hand logits");
  const std::size_t per_hand = kps.size() / 2;
  FrameResult r;
  for (int hand = 0; hand < 2; ++hand) {
    HandResult& hr = r.hands[hand];
    hr.present = sigmoid(vis_logits[kps.size() + hand]) >= hand_threshold;
    for (std::size_t j = 0; j < per_hand; ++j) {
      const std::size_t k = hand * per_hand + j;
      KeypointResult kr;
      kr.u = kps[k].u;
      kr.v = kps[k].v;
      kr.confidence = kps[k].confidence;
      kr.visible = hr.present && kps[k].confident && sigmoid(vis_logits[k]) >= kp_threshold;
      hr.keypoints.push_back(kr);
    }
  }
  r.early_out = !r.hands[0].present && !r.hands[1].present;
  return r;
}

void lift_to_2_5d(FrameResult& r, const Image16& depth, int window, double z_min, double z_max,
                  const CropTransform& t) {
  require(window >= 1 && window % 2 == 1, ErrorCode::InvalidArgument, "depth window must be odd");
  require(z_min <= z_max, ErrorCode::InvalidArgument, "z_min exceeds z_max");
  auto in_range = [&](double z) { return z >= z_min && z <= z_max; };
  const int half = window / 2;
  std::vector<std::uint16_t> valid;
  for (HandResult& hand : r.hands) {
    for (KeypointResult& kp : hand.keypoints) {
      kp.z.reset();
      kp.depth_valid = false;
      if (!kp.visible) continue;
      const double fx = std::floor(t.src_x(kp.u));
      const double fy = std::floor(t.src_y(kp.v));
      if (fx < 0 || fy < 0 || fx >= depth.w || fy >= depth.h) continue;
      const int x = static_cast<int>(fx);
      const int y = static_cast<int>(fy);
      const double direct = depth.at(y, x);
      if (in_range(direct)) {
        kp.z = direct;
        kp.depth_valid = true;
        continue;
      }
      valid.clear();
      for (int yy = std::max(0, y - half); yy <= std::min(depth.h - 1, y + half); ++yy)
        for (int xx = std::max(0, x - half); xx <= std::min(depth.w - 1, x + half); ++xx)
          if (in_range(depth.at(yy, xx))) valid.push_back(depth.at(yy, xx));
      if (valid.empty()) continue;
      const auto mid = valid.begin() + (valid.size() - 1) / 2;
      std::nth_element(valid.begin(), mid, valid.end());
      kp.z = *mid;
      kp.depth_valid = true;
    }
  }
}

std::string frame_result_json(const FrameResult& r) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["hands"] = ordered_json::array();
  for (const HandResult& h : r.hands) {
    ordered_json jh;
    jh["present"] = h.present;
    jh["keypoints"] = ordered_json::array();
    for (const KeypointResult& k : h.keypoints) {
      ordered_json jk;
      jk["u"] = k.u;
      jk["v"] = k.v;
      jk["confidence"] = k.confidence;
      jk["visible"] = k.visible;
      jk["z"] = k.z ? ordered_json(*k.z) : ordered_json(nullptr);
      jk["depth_valid"] = k.depth_valid;
      jh["keypoints"].push_back(jk);
    }
    doc["hands"].push_back(jh);
  }
  doc["early_out"] = r.early_out;
  return doc.dump(2) + "\n";
}

}  // namespace combnet
