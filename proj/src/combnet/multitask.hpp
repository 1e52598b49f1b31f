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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "combnet/config.hpp"
#include "combnet/forward.hpp"
#include "combnet/loss.hpp"

namespace combnet {

// Pixel position in input-image coordinates: u = column, v = row.
struct PixelUV {
  int u = 0;
  int v = 0;
};

// Per-frame annotation. Absent keypoints are not visible.
struct FrameTargets {
  std::vector<std::optional<PixelUV>> keypoints;      // 16
  std::vector<std::optional<PixelUV>> aux_keypoints;  // 18
  std::vector<int> fingertips;
  std::vector<int> aux_fingertips;
  std::array<bool, 2> hands_present{false, false};
  std::array<int, 2> orientation{0, 0};
  std::array<int, 2> pose{0, 0};
  std::vector<int> segmentation;  // class ids at heatmap resolution; empty if unlabeled
  int seg_h = 0;
  int seg_w = 0;
};

// JSON document:
//   { "keypoints": [[u, v] | null, ...16], "aux_keypoints": [...18],
//     "fingertips": [...], "aux_fingertips": [...],
//     "hands_present": [bool, bool], "orientation": [c, c], "pose": [c, c],
//     "segmentation": "labels.pgm" }
// Optional keys fall back to the config (fingertips) or to "unlabeled".
// A relative segmentation path resolves against base_dir.
FrameTargets parse_targets_json(const std::string& text, const NetConfig& cfg,
                                const std::string& base_dir = ".");
FrameTargets load_targets(const std::string& path, const NetConfig& cfg);

// Gradient of the weighted total with respect to each head output, laid out
// like the matching HeadsOutput member.
struct HeadGradients {
  std::vector<double> heatmaps;
  std::vector<double> aux_heatmaps;
  std::vector<double> visibility;
  std::vector<double> orientation;
  std::vector<double> pose;
  std::vector<double> segmentation;
  std::vector<std::vector<double>> deep_supervision;
};

struct MultitaskResult {
  LossBundle bundle;
  double total = 0.0;
  HeadGradients grad;
};

// Requires an AllHeads output for the heads the graph enables; absent heads
// contribute zero.
MultitaskResult evaluate_multitask(const HeadsOutput& heads, const FrameTargets& targets,
                                   const NetConfig& cfg, const LossWeights& weights = {});

// Mean over frames; gradients are scaled by 1 / batch.
std::vector<MultitaskResult> evaluate_batch(const std::vector<HeadsOutput>& heads,
                                            const std::vector<FrameTargets>& targets,
                                            const NetConfig& cfg, double* mean_total,
                                            const LossWeights& weights = {});

}  // namespace combnet
