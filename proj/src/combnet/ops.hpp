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

#include <vector>

#include "combnet/conv.hpp"
#include "combnet/tensor.hpp"

// Layout-agnostic elementwise and structural primitives.
namespace combnet {

Tensor relu(const Tensor& x, OpCounter* counter = nullptr);
void relu_inplace(Tensor& x, OpCounter* counter = nullptr);

Tensor upsample_nearest_2x(const Tensor& x);

// y = x * gamma / sqrt(var + eps) + (beta - mean * gamma / sqrt(var + eps)),
// applied as one multiply and one add per element.
Tensor batchnorm(const Tensor& x, const BnParams& bn, OpCounter* counter = nullptr);

// Elementwise a + b; shapes and layouts must match.
Tensor add(const Tensor& a, const Tensor& b, OpCounter* counter = nullptr);

Tensor concat_channels(const std::vector<Tensor>& parts);

// Per-channel spatial mean, returned as a C x 1 x 1 tensor.
Tensor global_avg_pool(const Tensor& x, OpCounter* counter = nullptr);

}  // namespace combnet
