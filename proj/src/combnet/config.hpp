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
#include <cstdint>
#include <string>
#include <vector>

namespace combnet {

// Network shape plus the post-processing and loss knobs that travel with a
// deployed model. Text form is `key = value` lines; '#' starts a comment.
// See configs/reference.cfg for every key with its default.
struct NetConfig {
  int input_h = 96;
  int input_w = 96;

  int tier1_channels = 16;
  int tier2_channels = 32;    // concatenation of the two unit outputs
  int tier2_bottleneck = 64;
  int tier2_groups = 4;
  int tier3_channels = 64;
  int tier3_bottleneck = 32;
  int tier3_groups = 8;
  int tier3_units = 2;
  std::vector<int> dilations{1, 2, 3, 4};

  int keypoints_per_hand = 8;
  int aux_keypoints_per_hand = 9;
  int orientation_classes = 8;
  int pose_classes = 9;
  int segmentation_classes = 3;

  int lane_width = 4;
  float bn_epsilon = 1e-5f;

  bool aux_keypoint_head = true;
  bool segmentation_head = true;
  bool deep_supervision = true;
  bool orientation_head = true;
  bool pose_head = true;

  // Indices into the 16 primary / 18 auxiliary keypoint maps.
  std::vector<int> fingertips{0, 1, 8, 9};
  std::vector<int> aux_fingertips{0, 1, 2, 9, 10, 11};
  float orientation_eps = 0.1f;

  float conf_threshold = 0.05f;
  float keypoint_threshold = 0.5f;
  float hand_threshold = 0.5f;
  int depth_window = 5;
  float z_min = 100.0f;
  float z_max = 1000.0f;
  std::array<float, 4> amplitude_coeffs{0.25f, 0.25f, 0.25f, 0.25f};

  int num_keypoints() const noexcept { return 2 * keypoints_per_hand; }
  int num_aux_keypoints() const noexcept { return 2 * aux_keypoints_per_hand; }
  int num_visibility() const noexcept { return num_keypoints() + 2; }
};

NetConfig parse_config(const std::string& text);
NetConfig load_config(const std::string& path);
// Canonical text: every key, fixed order, round-trips through parse_config.
std::string config_to_text(const NetConfig& cfg);
// FNV-1a 64 over the canonical text.
std::uint64_t config_hash(const NetConfig& cfg);

std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ull) noexcept;

}  // namespace combnet
