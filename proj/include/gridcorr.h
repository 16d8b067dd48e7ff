/*
 * Copyright 2026 The gridcorr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GRIDCORR_H_
#define GRIDCORR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GC_API __declspec(dllexport)
#else
#define GC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values 2, 3 and 4 double as CLI exit codes. */
typedef enum gc_status {
    GC_OK = 0,
    GC_ERR_INTERNAL = 1,
    GC_ERR_CONFIG = 2,
    GC_ERR_DIVERGED = 3,
    GC_ERR_IO = 4,
    GC_ERR_INVALID_ARG = 5
} gc_status;

typedef struct gc_model gc_model;

/* Message of the last failed call on this thread ("" if none). */
GC_API const char* gc_last_error(void);
GC_API const char* gc_version(void);

/* Resolves a JSON config (defaults filled in) into a newly allocated string;
 * release it with gc_string_free. */
GC_API gc_status gc_config_resolve(const char* config_json, char** resolved_json);
GC_API void gc_string_free(char* s);

/* Writes traj_<seed>.gct for seed in [seed_first, seed_last] and
 * manifest.json into out_dir. threads == 0 uses GRIDCORR_THREADS. */
GC_API gc_status gc_generate(const char* config_json, const char* out_dir, uint64_t seed_first,
                             uint64_t seed_last, unsigned threads);

/* New model from a config. dt <= 0 takes the coarse step of the config recipe. */
GC_API gc_status gc_model_create(const char* config_json, double dt, gc_model** out);
GC_API gc_status gc_model_load(const char* checkpoint_path, gc_model** out);
GC_API gc_status gc_model_save(const gc_model* model, const char* checkpoint_path);
GC_API void gc_model_free(gc_model* model);

GC_API gc_status gc_model_info(const gc_model* model, size_t* grid, size_t* channels, double* dt,
                               size_t* parameter_count, uint64_t* optimizer_step);

/* Trains on a manifest or trajectory file. epochs < 0 uses the config value.
 * The per-epoch loss log is written to loss_csv_path when non-NULL. */
GC_API gc_status gc_train(gc_model* model, const char* data_path, long epochs, const char* loss_csv_path);

/* Full-length rollouts from each trajectory's first snapshot; writes the
 * metrics CSV when non-NULL and the mean RMSE (NaN if any diverged). */
GC_API gc_status gc_evaluate(gc_model* model, const char* data_path, int contiguous_hct,
                             const char* metrics_csv_path, double* mean_rmse);

/* Rollout into a caller buffer of (steps + 1) * channels * grid * grid doubles. */
GC_API gc_status gc_rollout(const gc_model* model, const double* initial, size_t initial_len, size_t steps,
                            double* out, size_t out_len);
GC_API gc_status gc_rollout_file(const gc_model* model, const char* initial_path, size_t steps,
                                 const char* out_path);

/* Moment / constraint table of seven filter parameters, or of the model's filter. */
GC_API gc_status gc_verify_filter_params(const double params[7], const char* out_csv_path);
GC_API gc_status gc_verify_filter_model(const gc_model* model, const char* out_csv_path);

GC_API gc_status gc_spectra_file(const char* trajectory_path, int per_snapshot, const char* out_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* GRIDCORR_H_ */
