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
#include <optional>
#include <string>
#include <vector>

#include "combnet/config.hpp"
#include "combnet/conv.hpp"

namespace combnet {

// One convolution with its optional batch norm and ReLU.
struct ConvLayer {
  std::string name;
  ConvSpec conv;
  bool batchnorm = true;
  bool relu = true;
};

enum class BlockKind { ConvBNReLU, Bottleneck131, DilatedBottleneckResNet };
const char* block_kind_name(BlockKind kind) noexcept;

// Bottleneck131: 1x1 reduce, 3x3 grouped, 1x1 expand.
// DilatedBottleneckResNet: the same with a dilated 3x3, no ReLU on the
// expand conv, then relu(input + expand) through the additive skip.
struct BlockSpec {
  BlockKind kind = BlockKind::ConvBNReLU;
  std::string name;
  std::vector<ConvLayer> convs;
  int dilation = 1;
  bool residual = false;
};

struct UnitSpec {
  std::string name;
  std::vector<BlockSpec> blocks;
};

// Units run in sequence, each consuming the previous unit's output. With
// concat_units the tier emits the channel concatenation of all unit outputs
// (the tier input itself is never concatenated); otherwise the last unit's.
struct TierSpec {
  int index = 0;
  std::vector<UnitSpec> units;
  int out_channels = 0;
  int stride = 1;
  bool concat_units = false;
};

// Nearest 2x upsample followed by one convolution.
struct DecoderStage {
  std::string name;
  ConvLayer conv;
};

struct GraphSpec {
  NetConfig config;
  int input_h = 0;
  int input_w = 0;
  std::vector<TierSpec> tiers;  // exactly three

  std::vector<DecoderStage> decoder;  // channel-wise, reaching 1/2 resolution
  ConvLayer heatmap_head;             // on the last decoder stage
  ConvLayer visibility_head;          // 1x1 on pooled Tier-3 features

  // Training-time heads.
  std::optional<ConvLayer> orientation_head;  // 1x1 on pooled Tier-3
  std::optional<ConvLayer> pose_head;         // 1x1 on pooled Tier-3
  std::vector<DecoderStage> aux_decoder;      // ungrouped; last conv emits aux logits
  std::vector<ConvLayer> spatial_path;        // stride-2 ConvBNReLU stack from the image
  std::optional<ConvLayer> segmentation_head; // 1x1 on concat(spatial path, Tier-3), then 4x upsample
  std::vector<ConvLayer> deep_supervision;    // on Tier-3, decoder stage 1, decoder stage 2

  int heatmap_h() const noexcept { return input_h / 2; }
  int heatmap_w() const noexcept { return input_w / 2; }
};

GraphSpec build_graph(const NetConfig& config);

struct ValidationReport {
  std::vector<std::string> warnings;    // lane alignment
  std::vector<std::string> violations;  // architecture invariants
};

// Lane alignment covers feature convs only: task heads and channel-wise convs
// (one filter per group) are exempt.
ValidationReport validate_config(const GraphSpec& g, int lane_width);

enum class Scope { Inference, All };

enum class OpKind { Conv, Residual, GlobalPool };

// One arithmetic-carrying op of the graph with its symbolic cost.
struct LayerCost {
  std::string name;
  OpKind kind = OpKind::Conv;
  std::optional<ConvLayer> conv;
  Shape in;
  Shape out;
  bool inference = true;  // part of the deployed subgraph
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t flops = 0;
};

// Ops in execution order. Conv FLOPs = 2*MACs + bias adds + 2 per element
// for batch norm + 1 per element for ReLU; a residual join costs one add and
// one ReLU per element; global pooling one add per input element and one
// multiply per channel. Parameters count conv weights, biases and all four
// stored batch-norm arrays.
std::vector<LayerCost> enumerate_layers(const GraphSpec& g, Scope scope = Scope::All);

std::uint64_t conv_layer_params(const ConvLayer& l);
std::uint64_t count_params(const GraphSpec& g, Scope scope = Scope::Inference);
std::uint64_t count_flops(const GraphSpec& g, Scope scope = Scope::Inference);
std::uint64_t count_macs(const GraphSpec& g, Scope scope = Scope::Inference);

// Every conv layer of the graph (inference ones first within each section).
std::vector<const ConvLayer*> all_conv_layers(const GraphSpec& g, Scope scope = Scope::All);

}  // namespace combnet
