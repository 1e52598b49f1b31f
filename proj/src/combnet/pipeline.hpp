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

#include "combnet/forward.hpp"
#include "combnet/postprocess.hpp"

namespace combnet {

// normalize -> forward (inference heads) -> decode -> gate -> lift.
// The depth image must share the amplitude image's pixel grid.
FrameResult run_pipeline(const Network& net, const Image16& amplitude, const Image16& depth);

}  // namespace combnet
