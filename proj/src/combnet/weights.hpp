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
#include <unordered_map>
#include <vector>

#include "combnet/conv.hpp"
#include "combnet/graph.hpp"

namespace combnet {

struct WeightEntry {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t count() const noexcept;
  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

// Named arrays in insertion order. Per conv layer `L`:
//   L.weight  [out, in/groups, kh, kw]
//   L.bias    [out]                       (heads only)
//   L.bn_gamma, L.bn_beta, L.bn_mean, L.bn_var  [out]
class WeightStore {
 public:
  void set(const std::string& name, std::vector<std::uint32_t> dims, std::vector<float> data);
  const WeightEntry* find(const std::string& name) const;
  WeightEntry* find(const std::string& name);
  // Throws MissingWeights.
  const WeightEntry& get(const std::string& name) const;

  const std::vector<std::pair<std::string, WeightEntry>>& entries() const noexcept {
    return entries_;
  }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t total_values() const noexcept;

  // In-memory metadata; not part of the file format.
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const WeightStore& a, const WeightStore& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::pair<std::string, WeightEntry>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Glorot-uniform conv weights in +-sqrt(6 / (fan_in + fan_out)) with per-group
// fans, zero biases, identity batch norm. Each array draws from its own
// stream keyed by (seed, array name), so adding a head leaves the other
// arrays untouched.
WeightStore init_weights(const GraphSpec& g, std::uint64_t seed);

// Random batch-norm statistics and biases, for exercising the folding path.
void randomize_normalization(WeightStore& ws, const GraphSpec& g, std::uint64_t seed);

// Throws ShapeMismatch / MissingWeights when any layer disagrees with the graph.
void check_weights(const GraphSpec& g, const WeightStore& ws);

struct LayerParams {
  WeightArray weights;
  std::vector<float> bias;  // empty when the conv has no bias
  std::optional<BnParams> bn;
};

LayerParams layer_params(const WeightStore& ws, const ConvLayer& layer, float bn_epsilon);

// Binary format (little-endian): "CNWB", u32 version = 1, u32 layer_count,
// per layer {u16 name_len, name, u8 dtype (0 = f32), u8 ndim, ndim x u32
// dims, raw data}, trailing u32 CRC-32 over all preceding bytes.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

std::vector<std::uint8_t> serialize_weights(const WeightStore& ws);
// Error codes: BadMagic, BadVersion, Checksum, Format.
WeightStore parse_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const WeightStore& ws, const std::string& path);
WeightStore load_weights(const std::string& path);

}  // namespace combnet
