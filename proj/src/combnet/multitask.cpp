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

#include "combnet/multitask.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "combnet/error.hpp"
#include "combnet/pgm.hpp"

namespace combnet {

namespace {

using nlohmann::json;

std::vector<std::optional<PixelUV>> parse_points(const json& doc, const char* key,
                                                 std::size_t count, const NetConfig& cfg) {
  std::vector<std::optional<PixelUV>> out(count);
  if (!doc.contains(key)) return out;
  const json& arr = doc.at(key);
  require(arr.is_array() && arr.size() == count, ErrorCode::Format,
          std::string("targets: '") + key + "' must be an array of " + std::to_string(count));
  for (std::size_t i = 0; i < count; ++i) {
    const json& p = arr[i];
    if (p.is_null()) continue;
    require(p.is_array() && p.size() == 2 && p[0].is_number_integer() &&
                p[1].is_number_integer(),
            ErrorCode::Format, std::string("targets: '") + key + "' entries must be [u, v] or null");
    PixelUV uv{p[0].get<int>(), p[1].get<int>()};
    require(uv.u >= 0 && uv.u < cfg.input_w && uv.v >= 0 && uv.v < cfg.input_h,
            ErrorCode::InvalidArgument,
            std::string("targets: '") + key + "' point " + std::to_string(i) +
                " outside the input image");
    out[i] = uv;
  }
  return out;
}

std::vector<int> parse_indices(const json& doc, const char* key, std::vector<int> fallback) {
  if (!doc.contains(key)) return fallback;
  const json& arr = doc.at(key);
  require(arr.is_array(), ErrorCode::Format, std::string("targets: '") + key + "' must be an array");
  std::vector<int> out;
  for (const json& v : arr) {
    require(v.is_number_integer(), ErrorCode::Format,
            std::string("targets: '") + key + "' must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

template <typename T>
std::array<T, 2> parse_pair(const json& doc, const char* key, std::array<T, 2> fallback) {
  if (!doc.contains(key)) return fallback;
  const json& arr = doc.at(key);
  require(arr.is_array() && arr.size() == 2, ErrorCode::Format,
          std::string("targets: '") + key + "' must be a two-element array");
  try {
    return {arr[0].get<T>(), arr[1].get<T>()};
  } catch (const json::exception&) {
    fail(ErrorCode::Format, std::string("targets: '") + key + "' has wrong element type");
  }
}

KeypointTargets to_keypoint_targets(const std::vector<std::optional<PixelUV>>& pts,
                                    const std::vector<int>& fingertips, int factor) {
  KeypointTargets t;
  t.points.resize(pts.size());
  t.fingertip.assign(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i]) continue;
    t.points[i] = {true, pts[i]->v / factor, pts[i]->u / factor};
  }
  for (int f : fingertips) {
    require(f >= 0 && static_cast<std::size_t>(f) < pts.size(), ErrorCode::InvalidArgument,
            "fingertip index " + std::to_string(f) + " out of range");
    t.fingertip[f] = true;
  }
  return t;
}

std::vector<double> scaled(const std::vector<double>& g, double s) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = s * g[i];
  return out;
}

std::vector<double> to_double(const std::vector<float>& v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace

FrameTargets parse_targets_json(const std::string& text, const NetConfig& cfg,
                                const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Format, std::string("targets: invalid JSON: ") + e.what());
  }
  require(doc.is_object(), ErrorCode::Format, "targets: document must be an object");

  FrameTargets t;
  t.keypoints = parse_points(doc, "keypoints", cfg.num_keypoints(), cfg);
  t.aux_keypoints = parse_points(doc, "aux_keypoints", cfg.num_aux_keypoints(), cfg);
  t.fingertips = parse_indices(doc, "fingertips", cfg.fingertips);
  t.aux_fingertips = parse_indices(doc, "aux_fingertips", cfg.aux_fingertips);
  for (int f : t.fingertips)
    require(f >= 0 && f < cfg.num_keypoints(), ErrorCode::InvalidArgument,
            "targets: fingertip index out of range");
  for (int f : t.aux_fingertips)
    require(f >= 0 && f < cfg.num_aux_keypoints(), ErrorCode::InvalidArgument,
            "targets: aux fingertip index out of range");
  t.hands_present = parse_pair<bool>(doc, "hands_present", {false, false});
  t.orientation = parse_pair<int>(doc, "orientation", {0, 0});
  t.pose = parse_pair<int>(doc, "pose", {0, 0});
  for (int h = 0; h < 2; ++h) {
    if (!t.hands_present[h]) continue;
    require(t.orientation[h] >= 0 && t.orientation[h] < cfg.orientation_classes,
            ErrorCode::InvalidArgument, "targets: orientation class out of range");
    require(t.pose[h] >= 0 && t.pose[h] < cfg.pose_classes, ErrorCode::InvalidArgument,
            "targets: pose class out of range");
  }
  if (doc.contains("segmentation") && !doc.at("segmentation").is_null()) {
    require(doc.at("segmentation").is_string(), ErrorCode::Format,
            "targets: 'segmentation' must be a path string");
    std::filesystem::path p = doc.at("segmentation").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    const Image16 img = read_pgm(p.string());
    require(img.h == cfg.input_h / 2 && img.w == cfg.input_w / 2, ErrorCode::ShapeMismatch,
            "targets: segmentation label map must be " + std::to_string(cfg.input_h / 2) + "x" +
                std::to_string(cfg.input_w / 2));
    t.seg_h = img.h;
    t.seg_w = img.w;
    t.segmentation.assign(img.pixels.begin(), img.pixels.end());
    for (int v : t.segmentation)
      require(v < cfg.segmentation_classes, ErrorCode::InvalidArgument,
              "targets: segmentation label out of range");
  }
  return t;
}

FrameTargets load_targets(const std::string& path, const NetConfig& cfg) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::MissingInput, "cannot open targets '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_targets_json(ss.str(), cfg, std::filesystem::path(path).parent_path().string());
}

MultitaskResult evaluate_multitask(const HeadsOutput& heads, const FrameTargets& t,
                                   const NetConfig& cfg, const LossWeights& weights) {
  MultitaskResult r;
  r.bundle.weights = weights;
  HeadGradients& g = r.grad;
  HandLabels orient{t.hands_present, t.orientation};
  HandLabels pose{t.hands_present, t.pose};

  const LogitMaps hm = LogitMaps::from_tensor(heads.heatmaps);
  const int factor = cfg.input_h / hm.h;
  LossGrad kp = keypoint_ce(hm, to_keypoint_targets(t.keypoints, t.fingertips, factor));
  r.bundle.kp = kp.loss;
  g.heatmaps = scaled(kp.grad, weights.kp);

  if (heads.aux_heatmaps) {
    const LogitMaps aux = LogitMaps::from_tensor(*heads.aux_heatmaps);
    LossGrad akp = aux_keypoint_ce(
        aux, to_keypoint_targets(t.aux_keypoints, t.aux_fingertips, cfg.input_h / aux.h));
    r.bundle.akp = akp.loss;
    g.aux_heatmaps = scaled(akp.grad, weights.akp);
  }

  std::vector<bool> vis_labels;
  for (const auto& p : t.keypoints) vis_labels.push_back(p.has_value());
  vis_labels.push_back(t.hands_present[0]);
  vis_labels.push_back(t.hands_present[1]);
  LossGrad kphv = visibility_bce(to_double(heads.visibility), vis_labels);
  r.bundle.kphv = kphv.loss;
  g.visibility = scaled(kphv.grad, weights.kphv);

  if (!heads.orientation.empty()) {
    LossGrad cho = orientation_ce_soft(to_double(heads.orientation), cfg.orientation_classes,
                                       orient, cfg.orientation_eps);
    r.bundle.cho = cho.loss;
    g.orientation = scaled(cho.grad, weights.cho);
  }
  if (!heads.pose.empty()) {
    LossGrad dhp = handpose_ce(to_double(heads.pose), cfg.pose_classes, pose);
    r.bundle.dhp = dhp.loss;
    g.pose = scaled(dhp.grad, weights.dhp);
  }
  if (heads.segmentation && !t.segmentation.empty()) {
    LossGrad seg = seg_ce(LogitMaps::from_tensor(*heads.segmentation), t.segmentation);
    r.bundle.seg = seg.loss;
    g.segmentation = scaled(seg.grad, weights.seg);
  }
  if (!heads.deep_supervision.empty()) {
    std::vector<LogitMaps> scales;
    for (const Tensor& d : heads.deep_supervision) scales.push_back(LogitMaps::from_tensor(d));
    MultiScaleLoss ds = deep_supervision_loss(
        scales, to_keypoint_targets(t.keypoints, t.fingertips, 1), cfg.input_h, cfg.input_w);
    r.bundle.ds = ds.loss;
    for (const auto& gr : ds.grads) g.deep_supervision.push_back(scaled(gr, weights.ds));
  }
  r.total = total_loss(r.bundle);
  return r;
}

std::vector<MultitaskResult> evaluate_batch(const std::vector<HeadsOutput>& heads,
                                            const std::vector<FrameTargets>& targets,
                                            const NetConfig& cfg, double* mean_total,
                                            const LossWeights& weights) {
  require(!heads.empty() && heads.size() == targets.size(), ErrorCode::ShapeMismatch,
          "batch needs one target per output");
  const double inv = 1.0 / static_cast<double>(heads.size());
  std::vector<MultitaskResult> out;
  double total = 0.0;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    MultitaskResult r = evaluate_multitask(heads[i], targets[i], cfg, weights);
    total += r.total;
    auto scale_all = [&](std::vector<double>& v) {
      for (double& x : v) x *= inv;
    };
    scale_all(r.grad.heatmaps);
    scale_all(r.grad.aux_heatmaps);
    scale_all(r.grad.visibility);
    scale_all(r.grad.orientation);
    scale_all(r.grad.pose);
    scale_all(r.grad.segmentation);
    for (auto& d : r.grad.deep_supervision) scale_all(d);
    out.push_back(std::move(r));
  }
  if (mean_total) *mean_total = total * inv;
  return out;
}

}  // namespace combnet
