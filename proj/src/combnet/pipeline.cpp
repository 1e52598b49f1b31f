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

#include "combnet/pipeline.hpp"

#include "combnet/error.hpp"

namespace combnet {

FrameResult run_pipeline(const Network& net, const Image16& amplitude, const Image16& depth) {
  require(depth.h == amplitude.h && depth.w == amplitude.w, ErrorCode::ShapeMismatch,
          "depth image is " + std::to_string(depth.w) + "x" + std::to_string(depth.h) +
              " but amplitude image is " + std::to_string(amplitude.w) + "x" +
              std::to_string(amplitude.h));
  const GraphSpec& g = net.graph();
  const NetConfig& cfg = g.config;
  const NormalizedInput in = normalize_input(amplitude, g.input_h, g.input_w);
  const HeadsOutput out = net.forward(in.tensor, Mode::InferenceHeads);
  const auto kps = decode_heatmaps(out.heatmaps, g.input_h, g.input_w, cfg.conf_threshold);
  FrameResult r = gate_visibility(kps, out.visibility, cfg.keypoint_threshold, cfg.hand_threshold);
  if (!r.early_out) lift_to_2_5d(r, depth, cfg.depth_window, cfg.z_min, cfg.z_max, in.transform);
  return r;
}

}  // namespace combnet
