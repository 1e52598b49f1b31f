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
#include "combnet/pgm.hpp"
#include "combnet/tensor.hpp"

namespace combnet {

// Four raw phase images from the sensor plus its valid depth envelope.
struct PhaseFrame {
  std::array<Image16, 4> phases;
  float z_min = 100.0f;
  float z_max = 1000.0f;
};

// Pixelwise sum of coeffs[i] * phase[i], clamped to [0, 65535] and rounded.
Image16 amplitude_from_phases(const PhaseFrame& f,
                              const std::array<float, 4>& coeffs = {0.25f, 0.25f, 0.25f, 0.25f});

// Maps network-input coordinates back to the source image. The crop is the
// largest centered window with the network's aspect ratio.
struct CropTransform {
  int x0 = 0;
  int y0 = 0;
  int crop_w = 0;
  int crop_h = 0;
  int out_w = 0;
  int out_h = 0;

  double src_x(double u) const noexcept { return x0 + u * crop_w / out_w; }
  double src_y(double v) const noexcept { return y0 + v * crop_h / out_h; }
  static CropTransform identity(int h, int w) { return {0, 0, w, h, w, h}; }
};

struct NormalizedInput {
  Tensor tensor;  // 1 x H x W planar, values in [0, 1]
  CropTransform transform;
};

// Center crop, nearest-neighbour resample to out_h x out_w, divide by 65535.
NormalizedInput normalize_input(const Image16& image, int out_h, int out_w);
// Inverse of the value mapping only (no geometry): round(x * 65535).
Image16 denormalize(const Tensor& t);

struct DecodedKeypoint {
  double u = 0.0;  // input-image column, cell centre
  double v = 0.0;  // input-image row
  double confidence = 0.0;
  bool confident = false;  // confidence >= threshold
  int row = 0;             // argmax cell on the heatmap grid
  int col = 0;
};

// Per-map softmax argmax. Ties go to the smallest row-major index.
std::vector<DecodedKeypoint> decode_heatmaps(const Tensor& heatmaps, int input_h, int input_w,
                                             double conf_threshold);

struct KeypointResult {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
  bool visible = false;
  std::optional<double> z;  // millimetres; set only when depth_valid
  bool depth_valid = false;
};

struct HandResult {
  bool present = false;
  std::vector<KeypointResult> keypoints;
};

struct FrameResult {
  std::array<HandResult, 2> hands;
  bool early_out = false;
};

// Keypoints [0, n/2) belong to hand 0, the rest to hand 1. vis_logits holds
// one logit per keypoint followed by the two hand logits.
FrameResult gate_visibility(const std::vector<DecodedKeypoint>& kps,
                            const std::vector<float>& vis_logits, double kp_threshold,
                            double hand_threshold);

// Depth lookup for every visible keypoint. The keypoint position goes
// through `t` into depth-image pixels. Direct hit when the value lies in
// [z_min, z_max]; otherwise the lower median of in-range values in the
// window x window neighbourhood.
void lift_to_2_5d(FrameResult& r, const Image16& depth, int window, double z_min, double z_max,
                  const CropTransform& t);

std::string frame_result_json(const FrameResult& r);

double sigmoid(double x) noexcept;

}  // namespace combnet
