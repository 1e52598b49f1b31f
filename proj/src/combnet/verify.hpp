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

namespace combnet {

struct VerifyOptions {
  std::uint64_t seed = 1;
  int conv_cases = 120;
  int comb_cases = 40;
  int bn_cases = 50;
  int e2e_cases = 20;
  int loss_cases = 10;
  // Added to every packed kernel value before comparison (fault injection).
  float packed_perturbation = 0.0f;
};

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::string first_failure;  // empty when passed
  bool passed() const noexcept { return failures == 0; }
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;
  bool passed() const noexcept;
  // No timing or other run-dependent content: same seed, same bytes.
  std::string text() const;
};

// Suites: conv_oracle (packed vs reference), comb (planar and packed comb
// vs reference, multiply count vs mac_count), bn_fold, backend_e2e (full
// forward Reference vs Optimized), loss_gradients (central differences).
VerifyReport run_verify(const VerifyOptions& opt);

}  // namespace combnet
