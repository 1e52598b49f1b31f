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

#include "combnet/report.hpp"

#include <cstdio>
#include <sstream>

#include "combnet/weights.hpp"

namespace combnet {

namespace {

const char* kind_name(OpKind k) {
  switch (k) {
    case OpKind::Conv: return "conv";
    case OpKind::Residual: return "residual";
    case OpKind::GlobalPool: return "pool";
  }
  return "?";
}

std::string shape_str(const Shape& s) {
  return std::to_string(s.c) + "x" + std::to_string(s.h) + "x" + std::to_string(s.w);
}

}  // namespace

CountSummary summarize_counts(const GraphSpec& g) {
  CountSummary s;
  s.rows = enumerate_layers(g, Scope::All);
  for (const LayerCost& r : s.rows) {
    if (r.inference) {
      s.params += r.params;
      s.flops += r.flops;
      s.macs += r.macs;
    } else {
      s.training_params += r.params;
      s.training_flops += r.flops;
    }
  }
  s.weight_file_bytes = serialize_weights(init_weights(g, 0)).size();
  s.param_delta = (static_cast<double>(s.params) - kTargetParams) / kTargetParams;
  s.flop_delta = (static_cast<double>(s.flops) - kTargetFlops) / kTargetFlops;
  s.validation = validate_config(g, g.config.lane_width);
  return s;
}

std::string count_report_text(const CountSummary& s) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %-8s %-12s %-22s %9s %11s %11s\n", "layer", "kind",
                "out", "conv", "params", "macs", "flops");
  os << line;
  auto emit = [&](const LayerCost& r) {
    std::snprintf(line, sizeof line, "%-34s %-8s %-12s %-22s %9llu %11llu %11llu\n",
                  r.name.c_str(), kind_name(r.kind), shape_str(r.out).c_str(),
                  r.conv ? r.conv->conv.describe().c_str() : "-",
                  static_cast<unsigned long long>(r.params),
                  static_cast<unsigned long long>(r.macs),
                  static_cast<unsigned long long>(r.flops));
    os << line;
  };
  for (const LayerCost& r : s.rows)
    if (r.inference) emit(r);
  std::snprintf(line, sizeof line, "%-34s %-8s %-12s %-22s %9llu %11llu %11llu\n",
                "total (inference)", "", "", "", static_cast<unsigned long long>(s.params),
                static_cast<unsigned long long>(s.macs),
                static_cast<unsigned long long>(s.flops));
  os << line << "\ntraining-only heads\n";
  for (const LayerCost& r : s.rows)
    if (!r.inference) emit(r);
  std::snprintf(line, sizeof line, "%-34s %-8s %-12s %-22s %9llu %11s %11llu\n",
                "total (training-only)", "", "", "",
                static_cast<unsigned long long>(s.training_params), "",
                static_cast<unsigned long long>(s.training_flops));
  os << line << "\n";
  std::snprintf(line, sizeof line, "params  %llu (%.6fM)  target 0.041M  delta %+.2f%%\n",
                static_cast<unsigned long long>(s.params), s.params / 1e6, 100.0 * s.param_delta);
  os << line;
  std::snprintf(line, sizeof line, "flops   %llu (%.6f GFLOPs)  target 0.035 GFLOPs  delta %+.2f%%\n",
                static_cast<unsigned long long>(s.flops), s.flops / 1e9, 100.0 * s.flop_delta);
  os << line;
  std::snprintf(line, sizeof line, "weight file %zu bytes (limit %zu)\n", s.weight_file_bytes,
                kWeightFileLimit);
  os << line;
  for (const std::string& w : s.validation.warnings) os << "warning: " << w << "\n";
  for (const std::string& v : s.validation.violations) os << "violation: " << v << "\n";
  return os.str();
}

}  // namespace combnet
