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

#ifndef COMBNET_COMBNET_H_
#define COMBNET_COMBNET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CN_API __declspec(dllexport)
#else
#define CN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure cn_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum cn_status {
  CN_OK = 0,
  CN_ERR_INVALID_ARGUMENT = 1,
  CN_ERR_LAYOUT_MISMATCH = 2,
  CN_ERR_SHAPE_MISMATCH = 3,
  CN_ERR_CONFIG = 4,
  CN_ERR_UNSUPPORTED = 5,
  CN_ERR_IO = 6,
  CN_ERR_MISSING_INPUT = 7,
  CN_ERR_FORMAT = 8,
  CN_ERR_BAD_MAGIC = 9,
  CN_ERR_BAD_VERSION = 10,
  CN_ERR_CHECKSUM = 11,
  CN_ERR_MISSING_WEIGHTS = 12,
  CN_ERR_NON_FINITE = 13,
  CN_ERR_INTERNAL = 100
} cn_status;

typedef enum cn_backend { CN_BACKEND_REFERENCE = 0, CN_BACKEND_OPTIMIZED = 1 } cn_backend;

typedef struct cn_config cn_config;
typedef struct cn_weights cn_weights;
typedef struct cn_model cn_model;

typedef struct cn_counts {
  uint64_t params;
  uint64_t flops;
  uint64_t macs;
  uint64_t training_params;
  uint64_t training_flops;
  uint64_t weight_file_bytes;
  uint32_t lane_warnings;
  uint32_t violations;
} cn_counts;

CN_API const char* cn_version(void);
CN_API const char* cn_last_error(void);
CN_API const char* cn_status_name(cn_status s);
/* Frees strings returned through char** out-parameters. */
CN_API void cn_string_free(char* s);
CN_API cn_status cn_parse_backend(const char* name, cn_backend* out);

/* Configuration. */
CN_API cn_status cn_config_default(cn_config** out);
CN_API cn_status cn_config_parse(const char* text, cn_config** out);
CN_API cn_status cn_config_load(const char* path, cn_config** out);
CN_API cn_status cn_config_to_text(const cn_config* cfg, char** out);
CN_API cn_status cn_config_hash(const cn_config* cfg, uint64_t* out);
CN_API cn_status cn_config_input_dims(const cn_config* cfg, int* h, int* w);
CN_API void cn_config_free(cn_config* cfg);

/* Accounting. */
CN_API cn_status cn_count(const cn_config* cfg, cn_counts* out);
CN_API cn_status cn_count_report(const cn_config* cfg, char** out);

/* Weights. */
CN_API cn_status cn_weights_init(const cn_config* cfg, uint64_t seed, cn_weights** out);
CN_API cn_status cn_weights_load(const char* path, cn_weights** out);
CN_API cn_status cn_weights_save(const cn_weights* w, const char* path);
CN_API cn_status cn_weights_count(const cn_weights* w, size_t* arrays, size_t* values);
/* Copies up to `capacity` values of a named array; *count receives its size. */
CN_API cn_status cn_weights_get(const cn_weights* w, const char* name, float* buf,
                                size_t capacity, size_t* count);
/* Replaces the values of an existing array; `count` must match its size. */
CN_API cn_status cn_weights_set(cn_weights* w, const char* name, const float* data,
                                size_t count);
CN_API void cn_weights_free(cn_weights* w);

/* Model: config + weights prepared for one backend. Safe for concurrent
 * forward calls. */
CN_API cn_status cn_model_create(const cn_config* cfg, const cn_weights* w, cn_backend backend,
                                 cn_model** out);
CN_API void cn_model_free(cn_model* m);
CN_API cn_status cn_model_output_dims(const cn_model* m, int* maps, int* h, int* w,
                                      int* visibility);
/* Inference heads on a planar 1 x H x W image. heatmaps receives maps*h*w
 * planar values, visibility one logit per keypoint plus two hand logits. */
CN_API cn_status cn_model_forward(const cn_model* m, const float* image, size_t count,
                                  float* heatmaps, size_t heatmaps_cap, float* visibility,
                                  size_t visibility_cap);
/* Full post-processing pipeline on 16-bit images; returns the result JSON. */
CN_API cn_status cn_model_infer(const cn_model* m, const uint16_t* amplitude, int h, int w,
                                const uint16_t* depth, int depth_h, int depth_w, char** json);
/* Same, reading PGM files. Pass either amplitude_path or four phase_paths
 * (the other NULL); phases are combined with the config's coefficients. */
CN_API cn_status cn_model_infer_files(const cn_model* m, const char* amplitude_path,
                                      const char* const* phase_paths, const char* depth_path,
                                      char** json);
/* All heads on a planar image, evaluated against a targets JSON file.
 * Returns {"kp":..,"akp":..,"kphv":..,"cho":..,"dhp":..,"seg":..,"ds":..,"total":..}. */
CN_API cn_status cn_model_loss(const cn_model* m, const float* image, size_t count,
                               const char* targets_path, char** json);

/* Verification and benchmarks. */
CN_API cn_status cn_verify(uint64_t seed, float packed_perturbation, int* passed, char** report);
CN_API cn_status cn_bench(const cn_config* cfg, cn_backend backend, int iterations, int warmup,
                          uint64_t seed, char** table, char** csv);

#ifdef __cplusplus
}
#endif

#endif /* COMBNET_COMBNET_H_ */
