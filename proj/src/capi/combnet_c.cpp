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

#include "combnet/combnet.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "combnet/bench.hpp"
#include "combnet/error.hpp"
#include "combnet/multitask.hpp"
#include "combnet/pipeline.hpp"
#include "combnet/report.hpp"
#include "combnet/verify.hpp"

struct cn_config {
  combnet::NetConfig cfg;
};

struct cn_weights {
  combnet::WeightStore store;
};

struct cn_model {
  combnet::Network net;
};

namespace {

using combnet::ErrorCode;

thread_local std::string g_last_error;

cn_status set_error(cn_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `fn`, translating exceptions into status codes.
template <typename F>
cn_status guarded(F&& fn) {
  try {
    fn();
    return CN_OK;
  } catch (const combnet::Error& e) {
    return set_error(static_cast<cn_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CN_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(CN_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  combnet::require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

combnet::Backend to_backend(cn_backend b) {
  switch (b) {
    case CN_BACKEND_REFERENCE: return combnet::Backend::Reference;
    case CN_BACKEND_OPTIMIZED: return combnet::Backend::Optimized;
  }
  combnet::fail(ErrorCode::InvalidArgument, "unknown backend value");
}

combnet::Tensor image_tensor(const cn_model* m, const float* image, size_t count) {
  need(image, "image");
  const auto& g = m->net.graph();
  combnet::require(count == static_cast<size_t>(g.input_h) * g.input_w,
                   ErrorCode::ShapeMismatch,
                   "image must hold " + std::to_string(g.input_h) + "x" +
                       std::to_string(g.input_w) + " values");
  return combnet::Tensor({1, 1, g.input_h, g.input_w}, combnet::Layout::ChannelPlanar,
                         std::vector<float>(image, image + count));
}

combnet::Image16 image16(const uint16_t* px, int h, int w, const char* what) {
  need(px, what);
  combnet::require(h >= 1 && w >= 1, ErrorCode::InvalidArgument,
                   std::string(what) + " dims must be positive");
  combnet::Image16 img(h, w);
  std::memcpy(img.pixels.data(), px, img.pixels.size() * sizeof(uint16_t));
  return img;
}

}  // namespace

extern "C" {

const char* cn_version(void) { return "1.0.0"; }

const char* cn_last_error(void) { return g_last_error.c_str(); }

const char* cn_status_name(cn_status s) {
  if (s == CN_OK) return "ok";
  if (s == CN_ERR_INTERNAL) return "internal";
  if (s >= CN_ERR_INVALID_ARGUMENT && s <= CN_ERR_NON_FINITE)
    return combnet::error_code_name(static_cast<ErrorCode>(static_cast<int>(s)));
  return "unknown";
}

void cn_string_free(char* s) { std::free(s); }

cn_status cn_parse_backend(const char* name, cn_backend* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = combnet::parse_backend(name) == combnet::Backend::Reference ? CN_BACKEND_REFERENCE
                                                                       : CN_BACKEND_OPTIMIZED;
  });
}

cn_status cn_config_default(cn_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new cn_config{};
  });
}

cn_status cn_config_parse(const char* text, cn_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new cn_config{combnet::parse_config(text)};
  });
}

cn_status cn_config_load(const char* path, cn_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new cn_config{combnet::load_config(path)};
  });
}

cn_status cn_config_to_text(const cn_config* cfg, char** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = dup_string(combnet::config_to_text(cfg->cfg));
  });
}

cn_status cn_config_hash(const cn_config* cfg, uint64_t* out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = combnet::config_hash(cfg->cfg);
  });
}

cn_status cn_config_input_dims(const cn_config* cfg, int* h, int* w) {
  return guarded([&] {
    need(cfg, "cfg");
    if (h) *h = cfg->cfg.input_h;
    if (w) *w = cfg->cfg.input_w;
  });
}

void cn_config_free(cn_config* cfg) { delete cfg; }

cn_status cn_count(const cn_config* cfg, cn_counts* out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    const combnet::CountSummary s = combnet::summarize_counts(combnet::build_graph(cfg->cfg));
    out->params = s.params;
    out->flops = s.flops;
    out->macs = s.macs;
    out->training_params = s.training_params;
    out->training_flops = s.training_flops;
    out->weight_file_bytes = s.weight_file_bytes;
    out->lane_warnings = static_cast<uint32_t>(s.validation.warnings.size());
    out->violations = static_cast<uint32_t>(s.validation.violations.size());
  });
}

cn_status cn_count_report(const cn_config* cfg, char** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = dup_string(
        combnet::count_report_text(combnet::summarize_counts(combnet::build_graph(cfg->cfg))));
  });
}

cn_status cn_weights_init(const cn_config* cfg, uint64_t seed, cn_weights** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new cn_weights{combnet::init_weights(combnet::build_graph(cfg->cfg), seed)};
  });
}

cn_status cn_weights_load(const char* path, cn_weights** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new cn_weights{combnet::load_weights(path)};
  });
}

cn_status cn_weights_save(const cn_weights* w, const char* path) {
  return guarded([&] {
    need(w, "weights");
    need(path, "path");
    combnet::save_weights(w->store, path);
  });
}

cn_status cn_weights_count(const cn_weights* w, size_t* arrays, size_t* values) {
  return guarded([&] {
    need(w, "weights");
    if (arrays) *arrays = w->store.size();
    if (values) *values = w->store.total_values();
  });
}

cn_status cn_weights_get(const cn_weights* w, const char* name, float* buf, size_t capacity,
                         size_t* count) {
  return guarded([&] {
    need(w, "weights");
    need(name, "name");
    const combnet::WeightEntry& e = w->store.get(name);
    if (count) *count = e.data.size();
    if (buf) std::memcpy(buf, e.data.data(), std::min(capacity, e.data.size()) * sizeof(float));
  });
}

cn_status cn_weights_set(cn_weights* w, const char* name, const float* data, size_t count) {
  return guarded([&] {
    need(w, "weights");
    need(name, "name");
    need(data, "data");
    const combnet::WeightEntry& e = w->store.get(name);
    combnet::require(count == e.data.size(), ErrorCode::ShapeMismatch,
                     std::string("array '") + name + "' holds " + std::to_string(e.data.size()) +
                         " values");
    w->store.set(name, e.dims, std::vector<float>(data, data + count));
  });
}

void cn_weights_free(cn_weights* w) { delete w; }

cn_status cn_model_create(const cn_config* cfg, const cn_weights* w, cn_backend backend,
                          cn_model** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(w, "weights");
    need(out, "out");
    *out = new cn_model{
        combnet::Network(combnet::build_graph(cfg->cfg), w->store, to_backend(backend))};
  });
}

void cn_model_free(cn_model* m) { delete m; }

cn_status cn_model_output_dims(const cn_model* m, int* maps, int* h, int* w, int* visibility) {
  return guarded([&] {
    need(m, "model");
    const auto& g = m->net.graph();
    if (maps) *maps = g.config.num_keypoints();
    if (h) *h = g.heatmap_h();
    if (w) *w = g.heatmap_w();
    if (visibility) *visibility = g.config.num_visibility();
  });
}

cn_status cn_model_forward(const cn_model* m, const float* image, size_t count, float* heatmaps,
                           size_t heatmaps_cap, float* visibility, size_t visibility_cap) {
  return guarded([&] {
    need(m, "model");
    const combnet::HeadsOutput out =
        m->net.forward(image_tensor(m, image, count), combnet::Mode::InferenceHeads);
    const auto& hm = out.heatmaps.storage();
    if (heatmaps) {
      combnet::require(heatmaps_cap >= hm.size(), ErrorCode::InvalidArgument,
                       "heatmap buffer too small");
      std::memcpy(heatmaps, hm.data(), hm.size() * sizeof(float));
    }
    if (visibility) {
      combnet::require(visibility_cap >= out.visibility.size(), ErrorCode::InvalidArgument,
                       "visibility buffer too small");
      std::memcpy(visibility, out.visibility.data(), out.visibility.size() * sizeof(float));
    }
  });
}

cn_status cn_model_infer(const cn_model* m, const uint16_t* amplitude, int h, int w,
                         const uint16_t* depth, int depth_h, int depth_w, char** json) {
  return guarded([&] {
    need(m, "model");
    need(json, "json");
    const combnet::FrameResult r =
        combnet::run_pipeline(m->net, image16(amplitude, h, w, "amplitude"),
                              image16(depth, depth_h, depth_w, "depth"));
    *json = dup_string(combnet::frame_result_json(r));
  });
}

cn_status cn_model_infer_files(const cn_model* m, const char* amplitude_path,
                               const char* const* phase_paths, const char* depth_path,
                               char** json) {
  return guarded([&] {
    need(m, "model");
    need(depth_path, "depth_path");
    need(json, "json");
    combnet::require((amplitude_path != nullptr) != (phase_paths != nullptr),
                     ErrorCode::InvalidArgument,
                     "give exactly one of an amplitude image or four phase images");
    const combnet::NetConfig& cfg = m->net.graph().config;
    combnet::Image16 amp;
    if (amplitude_path) {
      amp = combnet::read_pgm(amplitude_path);
    } else {
      combnet::PhaseFrame f;
      f.z_min = cfg.z_min;
      f.z_max = cfg.z_max;
      for (int i = 0; i < 4; ++i) {
        need(phase_paths[i], "phase path");
        f.phases[i] = combnet::read_pgm(phase_paths[i]);
      }
      amp = combnet::amplitude_from_phases(f, cfg.amplitude_coeffs);
    }
    const combnet::Image16 depth = combnet::read_pgm(depth_path);
    *json = dup_string(combnet::frame_result_json(combnet::run_pipeline(m->net, amp, depth)));
  });
}

cn_status cn_model_loss(const cn_model* m, const float* image, size_t count,
                        const char* targets_path, char** json) {
  return guarded([&] {
    need(m, "model");
    need(targets_path, "targets_path");
    need(json, "json");
    const combnet::NetConfig& cfg = m->net.graph().config;
    const combnet::HeadsOutput out =
        m->net.forward(image_tensor(m, image, count), combnet::Mode::AllHeads);
    const combnet::FrameTargets t = combnet::load_targets(targets_path, cfg);
    const combnet::MultitaskResult r = combnet::evaluate_multitask(out, t, cfg);
    nlohmann::ordered_json doc;
    doc["kp"] = r.bundle.kp;
    doc["akp"] = r.bundle.akp;
    doc["kphv"] = r.bundle.kphv;
    doc["cho"] = r.bundle.cho;
    doc["dhp"] = r.bundle.dhp;
    doc["seg"] = r.bundle.seg;
    doc["ds"] = r.bundle.ds;
    doc["total"] = r.total;
    *json = dup_string(doc.dump(2) + "\n");
  });
}

cn_status cn_verify(uint64_t seed, float packed_perturbation, int* passed, char** report) {
  return guarded([&] {
    combnet::VerifyOptions opt;
    opt.seed = seed;
    opt.packed_perturbation = packed_perturbation;
    const combnet::VerifyReport r = combnet::run_verify(opt);
    if (passed) *passed = r.passed() ? 1 : 0;
    if (report) *report = dup_string(r.text());
  });
}

cn_status cn_bench(const cn_config* cfg, cn_backend backend, int iterations, int warmup,
                   uint64_t seed, char** table, char** csv) {
  return guarded([&] {
    need(cfg, "cfg");
    combnet::BenchOptions opt;
    opt.backend = to_backend(backend);
    opt.iterations = iterations;
    opt.warmup = warmup;
    opt.seed = seed;
    const combnet::BenchReport r = combnet::run_bench(cfg->cfg, opt);
    char* t = table ? dup_string(r.table()) : nullptr;
    if (csv) *csv = dup_string(r.csv());
    if (table) *table = t;
  });
}

}  // extern "C"
