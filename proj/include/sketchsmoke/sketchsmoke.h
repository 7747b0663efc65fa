/* Copyright 2026 The SketchSmoke Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libsketchsmoke.
 *
 * Every fallible call returns an sks_status; on failure a message is
 * available from sks_last_error() on the calling thread. Handles are opaque
 * and owned by the caller. Strings returned through char** are released
 * with sks_string_free. */

#ifndef SKETCHSMOKE_SKETCHSMOKE_H_
#define SKETCHSMOKE_SKETCHSMOKE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SKS_API __declspec(dllexport)
#else
#define SKS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SKS_ABI_VERSION 1u

typedef enum sks_status {
  SKS_OK = 0,
  SKS_INVALID_ARGUMENT = 1,
  SKS_IO = 2,
  SKS_PARSE = 3,
  SKS_SHAPE = 4,
  SKS_SOLVER = 5,
  SKS_NOT_FOUND = 6,
  SKS_INTERNAL = 7
} sks_status;

typedef enum sks_field_kind {
  SKS_NODE_SCALAR = 0,
  SKS_CELL_SCALAR = 1,
  SKS_MAC = 2
} sks_field_kind;

typedef struct sks_field sks_field;
typedef struct sks_strokes sks_strokes;
typedef struct sks_sim sks_sim;

typedef struct sks_field_info {
  sks_field_kind kind;
  int32_t nx;
  int32_t ny;
  double dx;
} sks_field_info;

typedef struct sks_solve_stats {
  int32_t iterations;
  double final_residual;
  int32_t converged;
} sks_solve_stats;

typedef struct sks_hhd_result {
  double residual_norm;
  double potential_norm_ratio; /* ||grad P|| / ||U|| */
  sks_solve_stats psi_stats;
  sks_solve_stats potential_stats;
} sks_hhd_result;

typedef struct sks_step_result {
  double cfl;
  sks_solve_stats projection;
} sks_step_result;

SKS_API uint32_t sks_abi_version(void);
SKS_API const char* sks_last_error(void);
SKS_API void sks_string_free(char* s);

/* Fields. */
SKS_API sks_status sks_field_read(const char* path, sks_field** out);
SKS_API sks_status sks_field_write(const sks_field* field, const char* path);
SKS_API sks_status sks_field_info_get(const sks_field* field, sks_field_info* out);
SKS_API void sks_field_destroy(sks_field* field);

/* Decomposition. psi_out receives the node stream function. */
SKS_API sks_status sks_stream_function(const sks_field* velocity, double tol, sks_field** psi_out,
                                       sks_solve_stats* stats);
SKS_API sks_status sks_decompose(const sks_field* velocity, double tol, sks_field** psi_out,
                                 sks_field** harmonic_out, sks_hhd_result* result);
SKS_API sks_status sks_curl(const sks_field* psi, sks_field** velocity_out);

/* Evaluation. */
SKS_API sks_status sks_mse(const sks_field* a, const sks_field* b, double* out);
SKS_API sks_status sks_normalize01(const sks_field* field, sks_field** out);

/* Strokes and sketches. */
SKS_API sks_status sks_strokes_read(const char* path, sks_strokes** out);
SKS_API sks_status sks_strokes_write(const sks_strokes* strokes, const char* path);
SKS_API size_t sks_strokes_count(const sks_strokes* strokes);
SKS_API void sks_strokes_destroy(sks_strokes* strokes);
SKS_API sks_status sks_streamlines(const sks_field* velocity, int32_t seeds, double h,
                                   int32_t max_steps, double min_speed, int32_t bidirectional,
                                   sks_strokes** out);
SKS_API sks_status sks_sketch_write_png(const sks_strokes* strokes, int32_t width, int32_t height,
                                        const char* path);

/* Reconstruction. lambda <= 0 keeps the default; report_json may be NULL. */
SKS_API sks_status sks_reconstruct(const sks_strokes* strokes, int32_t nx, int32_t ny, double dx,
                                   double lambda, double tol, sks_field** psi_out,
                                   char** report_json);
/* Runs STAGE1_CMD (and STAGE2_CMD when set) from the environment. Returns
 * SKS_NOT_FOUND when STAGE1_CMD is unset. velocity_out may be NULL. */
SKS_API sks_status sks_external_generate(const sks_strokes* strokes, int32_t nx, int32_t ny,
                                         double dx, sks_field** psi_out, sks_field** velocity_out);
SKS_API sks_status sks_validate_generated(const char* path, sks_field_kind expected, int32_t nx,
                                          int32_t ny, double dx, char** diagnostics_json);

/* Simulation. config_json uses the simulation config schema; NULL or "" for defaults. */
SKS_API sks_status sks_sim_create(const char* config_json, sks_sim** out);
SKS_API sks_status sks_sim_set_target(sks_sim* sim, const sks_field* target, double gain);
SKS_API sks_status sks_sim_step(sks_sim* sim, sks_step_result* result);
SKS_API int32_t sks_sim_steps_requested(const sks_sim* sim);
SKS_API sks_status sks_sim_density_png(const sks_sim* sim, const char* path);
SKS_API sks_status sks_sim_velocity(const sks_sim* sim, sks_field** out);
SKS_API sks_status sks_sim_density(const sks_sim* sim, sks_field** out);
SKS_API void sks_sim_destroy(sks_sim* sim);

/* Dataset generation; summary_json receives {"records":N,"failures":[...],"manifest":path}. */
SKS_API sks_status sks_dataset_generate(const char* config_json, char** summary_json);

/* Blocks serving HTTP until the process is terminated. port 0 picks a free port. */
SKS_API sks_status sks_serve(const char* host, int32_t port, int32_t max_sessions,
                             int32_t idle_timeout_secs);

#ifdef __cplusplus
}
#endif

#endif /* SKETCHSMOKE_SKETCHSMOKE_H_ */
