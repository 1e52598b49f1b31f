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

// combnet command-line tool: count | verify | bench | infer | init-weights.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "combnet/combnet.h"

namespace {

enum Exit : int {
  kOk = 0,
  kVerifyFailed = 1,
  kInputError = 2,
  kConfigError = 3,
  kFormatError = 4,
};

int exit_code(cn_status s) {
  switch (s) {
    case CN_OK: return kOk;
    case CN_ERR_MISSING_INPUT:
    case CN_ERR_IO: return kInputError;
    case CN_ERR_FORMAT:
    case CN_ERR_BAD_MAGIC:
    case CN_ERR_BAD_VERSION:
    case CN_ERR_CHECKSUM:
    case CN_ERR_MISSING_WEIGHTS: return kFormatError;
    default: return kConfigError;
  }
}

struct Failure {
  int code;
};

void check(cn_status s) {
  if (s == CN_OK) return;
  std::cerr << "combnet: " << cn_status_name(s) << ": " << cn_last_error() << "\n";
  throw Failure{exit_code(s)};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<cn_config, Deleter<cn_config, cn_config_free>>;
using WeightsPtr = std::unique_ptr<cn_weights, Deleter<cn_weights, cn_weights_free>>;
using ModelPtr = std::unique_ptr<cn_model, Deleter<cn_model, cn_model_free>>;

struct CString {
  char* p = nullptr;
  ~CString() { cn_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

ConfigPtr load_config(const std::string& path) {
  cn_config* c = nullptr;
  check(path.empty() ? cn_config_default(&c) : cn_config_load(path.c_str(), &c));
  return ConfigPtr(c);
}

cn_backend parse_backend(const std::string& name) {
  cn_backend b;
  check(cn_parse_backend(name.c_str(), &b));
  return b;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) {
    std::cerr << "combnet: cannot write '" << path << "'\n";
    throw Failure{kInputError};
  }
}

std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("COMBNET_SEED");
  if (!env || !*env) return flag;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') {
    std::cerr << "combnet: COMBNET_SEED must be an unsigned integer\n";
    throw Failure{kConfigError};
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"combnet: compact hand keypoint network toolkit"};
  app.require_subcommand(1);

  std::string config_path, weights_path, out_path, csv_path, backend_name = "optimized";
  std::string amplitude_path, depth_path;
  std::vector<std::string> phase_paths;
  std::uint64_t seed = 1;
  int iters = 10, warmup = 3;
  float perturb = 0.0f;

  auto* count = app.add_subcommand("count", "Per-layer parameter and FLOP report");
  count->add_option("--config", config_path, "Config file (default: built-in reference)");
  count->add_option("--out", out_path, "Write the report here instead of stdout");

  auto* verify = app.add_subcommand("verify", "Run oracle equivalence and gradient suites");
  verify->add_option("--seed", seed, "RNG seed (COMBNET_SEED overrides)");
  verify->add_option("--perturb", perturb, "Add this value to packed kernels (fault injection)");
  verify->add_option("--out", out_path, "Write the report here instead of stdout");

  auto* bench = app.add_subcommand("bench", "Time the forward pass and layer kernels");
  bench->add_option("--config", config_path, "Config file");
  bench->add_option("--backend", backend_name, "reference | optimized");
  bench->add_option("--iters", iters, "Timed iterations per case")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", warmup, "Untimed warm-up iterations")->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", seed, "RNG seed (COMBNET_SEED overrides)");
  bench->add_option("--out", out_path, "Write the table here instead of stdout");
  bench->add_option("--csv", csv_path, "Also write the report as CSV");

  auto* infer = app.add_subcommand("infer", "Keypoints for one frame as JSON");
  infer->add_option("--config", config_path, "Config file");
  infer->add_option("--weights", weights_path, "Weight file (default: seeded initialization)");
  infer->add_option("--seed", seed, "Seed for initialized weights (COMBNET_SEED overrides)");
  infer->add_option("--backend", backend_name, "reference | optimized");
  auto* amp_opt = infer->add_option("--amplitude", amplitude_path, "16-bit PGM amplitude image");
  auto* phase_opt =
      infer->add_option("--phases", phase_paths, "Four 16-bit PGM phase images")->expected(4);
  amp_opt->excludes(phase_opt);
  infer->add_option("--depth", depth_path, "16-bit PGM depth image (mm)")->required();
  infer->add_option("--out", out_path, "Write the JSON here instead of stdout");

  auto* init = app.add_subcommand("init-weights", "Write seeded initial weights");
  init->add_option("--config", config_path, "Config file");
  init->add_option("--seed", seed, "RNG seed (COMBNET_SEED overrides)");
  init->add_option("--out", out_path, "Output weight file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (count->parsed()) {
      ConfigPtr cfg = load_config(config_path);
      CString report;
      check(cn_count_report(cfg.get(), &report.p));
      emit(report.str(), out_path);
      return kOk;
    }
    if (verify->parsed()) {
      int passed = 0;
      CString report;
      check(cn_verify(effective_seed(seed), perturb, &passed, &report.p));
      emit(report.str(), out_path);
      return passed ? kOk : kVerifyFailed;
    }
    if (bench->parsed()) {
      ConfigPtr cfg = load_config(config_path);
      const cn_backend b = parse_backend(backend_name);
      CString table, csv;
      check(cn_bench(cfg.get(), b, iters, warmup, effective_seed(seed), &table.p, &csv.p));
      emit(table.str(), out_path);
      if (!csv_path.empty()) emit(csv.str(), csv_path);
      return kOk;
    }
    if (infer->parsed()) {
      if (amplitude_path.empty() == phase_paths.empty()) {
        std::cerr << "combnet: infer needs --amplitude or --phases\n";
        return kConfigError;
      }
      ConfigPtr cfg = load_config(config_path);
      const cn_backend b = parse_backend(backend_name);
      cn_weights* w = nullptr;
      check(weights_path.empty() ? cn_weights_init(cfg.get(), effective_seed(seed), &w)
                                 : cn_weights_load(weights_path.c_str(), &w));
      WeightsPtr weights(w);
      cn_model* m = nullptr;
      check(cn_model_create(cfg.get(), weights.get(), b, &m));
      ModelPtr model(m);
      std::vector<const char*> phases;
      for (const auto& p : phase_paths) phases.push_back(p.c_str());
      CString json;
      check(cn_model_infer_files(model.get(),
                                 amplitude_path.empty() ? nullptr : amplitude_path.c_str(),
                                 phases.empty() ? nullptr : phases.data(), depth_path.c_str(),
                                 &json.p));
      emit(json.str(), out_path);
      return kOk;
    }
    if (init->parsed()) {
      ConfigPtr cfg = load_config(config_path);
      cn_weights* w = nullptr;
      check(cn_weights_init(cfg.get(), effective_seed(seed), &w));
      WeightsPtr weights(w);
      check(cn_weights_save(weights.get(), out_path.c_str()));
      return kOk;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kConfigError;
}
