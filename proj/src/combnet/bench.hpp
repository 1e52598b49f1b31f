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

#include "combnet/config.hpp"
#include "combnet/forward.hpp"

namespace combnet {

struct BenchCase {
  std::string name;
  std::string backend;
  std::string layer;
  int iterations = 0;
  double min_ms = 0.0;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  std::uint64_t macs = 0;          // from mac_count / count_macs
  std::uint64_t multiplies = 0;    // instrumented, one untimed run
  double macs_per_second() const noexcept;
};

struct BenchReport {
  std::string timestamp;  // UTC, ISO 8601
  std::uint64_t config_hash = 0;
  std::vector<BenchCase> cases;

  std::string table() const;
  std::string csv() const;
};

struct BenchOptions {
  Backend backend = Backend::Optimized;
  int iterations = 10;
  int warmup = 3;
  std::uint64_t seed = 1;
};

// Cases: full forward on the chosen backend, the Tier-2 grouped 3x3 conv
// (reference vs packed), and a Tier-3 shaped dilated conv for d = 2, 3, 4
// (zero-stuffed kernel vs comb). Single-threaded.
BenchReport run_bench(const NetConfig& cfg, const BenchOptions& opt);

}  // namespace combnet
