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

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "combnet/graph.hpp"
#include "combnet/weights.hpp"

namespace combnet {

// Reference: planar tensors, conv2d_ref (direct dilation), batch norm as a
// separate pass. Optimized: interleaved tensors, batch norm folded into
// packed kernels, dilated layers through the comb decomposition.
enum class Backend { Reference, Optimized };
enum class Mode { InferenceHeads, AllHeads };

const char* backend_name(Backend b) noexcept;
Backend parse_backend(const std::string& name);

// All tensors planar regardless of backend. Vector heads are hand-major
// (hand 0 classes, then hand 1 classes).
struct HeadsOutput {
  Tensor heatmaps;
  std::vector<float> visibility;  // keypoints, then the two hand flags

  std::optional<Tensor> aux_heatmaps;
  std::vector<float> orientation;
  std::vector<float> pose;
  std::optional<Tensor> segmentation;
  std::vector<Tensor> deep_supervision;  // 1/8, 1/4, 1/2 resolution
};

// One entry per arithmetic op, named and ordered exactly like enumerate_layers.
struct TraceEntry {
  std::string name;
  Shape out;
  OpCounter ops;
};

// Graph bound to weights and prepared for one backend. Immutable after
// construction; forward may be called concurrently.
class Network {
 public:
  Network(GraphSpec graph, const WeightStore& weights, Backend backend);

  HeadsOutput forward(const Tensor& image, Mode mode, OpCounter* counter = nullptr,
                      std::vector<TraceEntry>* trace = nullptr) const;

  const GraphSpec& graph() const noexcept { return graph_; }
  Backend backend() const noexcept { return backend_; }

  struct PreparedConv {
    ConvLayer layer;
    // Reference backend.
    WeightArray weights;
    std::vector<float> bias;
    std::optional<BnParams> bn;
    // Optimized backend: batch norm folded, kernel stack packed.
    ConvSpec folded_spec;
    PackedWeights packed;
    std::vector<float> folded_bias;
  };
  const PreparedConv& prepared(const std::string& name) const;

 private:
  GraphSpec graph_;
  Backend backend_;
  std::unordered_map<std::string, PreparedConv> convs_;
};

HeadsOutput forward(const GraphSpec& g, const WeightStore& weights, const Tensor& image,
                    Backend backend, Mode mode, OpCounter* counter = nullptr);

}  // namespace combnet
