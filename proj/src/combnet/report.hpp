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

#include <cstdint>
#include <string>
#include <vector>

#include "combnet/graph.hpp"

namespace combnet {

inline constexpr double kTargetParams = 0.041e6;
inline constexpr double kTargetFlops = 0.035e9;
inline constexpr std::size_t kWeightFileLimit = 300 * 1000;

struct CountSummary {
  std::vector<LayerCost> rows;  // all layers; LayerCost::inference marks the deployed ones
  std::uint64_t params = 0;     // inference subgraph
  std::uint64_t flops = 0;
  std::uint64_t macs = 0;
  std::uint64_t training_params = 0;  // training-only heads
  std::uint64_t training_flops = 0;
  std::size_t weight_file_bytes = 0;  // all layers, serialized
  double param_delta = 0.0;           // relative to kTargetParams
  double flop_delta = 0.0;
  ValidationReport validation;
};

CountSummary summarize_counts(const GraphSpec& g);
std::string count_report_text(const CountSummary& s);

}  // namespace combnet
