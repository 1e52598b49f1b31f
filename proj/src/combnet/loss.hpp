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
#include <vector>

#include "combnet/tensor.hpp"

// Task losses with analytic gradients. Everything is evaluated in double;
// softmax uses max subtraction.
namespace combnet {

// K maps of h x w logits, map-major then row-major.
struct LogitMaps {
  int maps = 0;
  int h = 0;
  int w = 0;
  std::vector<double> data;

  static LogitMaps from_tensor(const Tensor& t);
  static LogitMaps uniform(int maps, int h, int w, double value = 0.0);
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Target cell per keypoint map, in the coordinates of the map it scores.
struct KeypointLabel {
  bool visible = false;
  int row = 0;
  int col = 0;
};

struct KeypointTargets {
  std::vector<KeypointLabel> points;
  std::vector<bool> fingertip;  // same length as points; doubles that map's loss

  // Integer division of every visible coordinate.
  KeypointTargets downscaled(int factor) const;
};

struct HandLabels {
  std::array<bool, 2> present{false, false};
  std::array<int, 2> cls{0, 0};
};

// Spatial-softmax cross-entropy against one-hot target cells. Loss is
// sum(weight_k * CE_k) / (number of visible maps); fingertip weight 2, else 1.
// Invisible maps contribute nothing and receive zero gradient.
LossGrad keypoint_ce(const LogitMaps& logits, const KeypointTargets& targets);
LossGrad aux_keypoint_ce(const LogitMaps& logits, const KeypointTargets& targets);

// Mean sigmoid binary cross-entropy.
LossGrad visibility_bce(const std::vector<double>& logits, const std::vector<bool>& labels);

// Per-hand softmax cross-entropy against (1 - eps) * one_hot + eps / classes,
// averaged over present hands. logits are hand-major, 2 x classes.
LossGrad orientation_ce_soft(const std::vector<double>& logits, int classes,
                             const HandLabels& labels, double eps);
LossGrad handpose_ce(const std::vector<double>& logits, int classes, const HandLabels& labels);

// Mean per-pixel softmax cross-entropy; labels are class ids, row-major h x w.
LossGrad seg_ce(const LogitMaps& logits, const std::vector<int>& labels);

struct MultiScaleLoss {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // one per scale
};

// Sum of keypoint_ce at 1/8, 1/4 and 1/2 of the input resolution, in that
// order. Targets are in input-image pixels and are divided down per scale.
MultiScaleLoss deep_supervision_loss(const std::vector<LogitMaps>& scales,
                                     const KeypointTargets& input_targets, int input_h,
                                     int input_w);

struct LossWeights {
  double kp = 1.0;
  double akp = 1.0;
  double kphv = 20.0;
  double cho = 20.0;
  double dhp = 10.0;
  double seg = 50.0;
  double ds = 1.0;
};

struct LossBundle {
  double kp = 0.0;
  double akp = 0.0;
  double kphv = 0.0;
  double cho = 0.0;
  double dhp = 0.0;
  double seg = 0.0;
  double ds = 0.0;
  LossWeights weights{};
};

// Weighted sum; throws NonFinite on NaN/inf terms.
double total_loss(const LossBundle& b);

}  // namespace combnet
