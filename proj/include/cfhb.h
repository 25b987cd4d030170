// SPDX-License-Identifier: Apache-2.0
//
// cfhb: cell-free massive MIMO with hybrid beamforming, simulation library
// Copyright (C) 2026 The cfhb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

/* C interface of the cfhb simulation library. Every call returns a status
 * code; on failure cfhb_last_error() describes the problem (per thread).
 * Handles are opaque and owned by the caller until passed to the matching
 * *_destroy function. Strings returned through out-structs stay valid for
 * the lifetime of the handle they came from. */

#ifndef CFHB_H
#define CFHB_H

#include <stddef.h>
#include <stdint.h>

#if defined(CFHB_BUILDING_LIBRARY)
#define CFHB_API __attribute__((visibility("default")))
#else
#define CFHB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cfhb_status {
    CFHB_OK = 0,
    CFHB_ERR_INVALID_ARGUMENT = 1, /* null handle, bad index, unknown mode or utility */
    CFHB_ERR_CONFIG = 2,
    CFHB_ERR_DIMENSION = 3,
    CFHB_ERR_NUMERICAL = 4,
    CFHB_ERR_IO = 5,
    CFHB_ERR_INTERNAL = 6
} cfhb_status;

typedef struct cfhb_config cfhb_config;
typedef struct cfhb_result cfhb_result;
typedef struct cfhb_validation cfhb_validation;

CFHB_API const char* cfhb_version(void);
CFHB_API const char* cfhb_last_error(void);
/* Geometry and block of the last failed campaign call; -1 when unknown or
 * when the failure was not tied to one block. */
CFHB_API void cfhb_last_error_location(int* geometry, int64_t* block);
CFHB_API const char* cfhb_status_string(cfhb_status status);

/* Worker threads for Monte Carlo loops; 0 = hardware concurrency. Results
 * do not depend on this setting. */
CFHB_API void cfhb_set_threads(int threads);

/* ---- configuration ---------------------------------------------------- */

/* Defaults for everything except num_aps, antennas_per_ap and rf_chains,
 * which must be set before use. */
CFHB_API cfhb_status cfhb_config_create(cfhb_config** out);
CFHB_API cfhb_status cfhb_config_load(const char* path, cfhb_config** out);
CFHB_API cfhb_status cfhb_config_parse(const char* text, cfhb_config** out);
CFHB_API cfhb_status cfhb_config_set(cfhb_config* config, const char* key, const char* value);
CFHB_API cfhb_status cfhb_config_validate(const cfhb_config* config);
/* Canonical "key = value" text. Writes at most capacity bytes including the
 * terminator; *needed receives the full length + 1. */
CFHB_API cfhb_status cfhb_config_format(const cfhb_config* config, char* buffer, size_t capacity, size_t* needed);
/* 16 hex digits plus terminator. */
CFHB_API cfhb_status cfhb_config_fingerprint(const cfhb_config* config, char out[17]);
CFHB_API cfhb_status cfhb_config_se_prefactor(const cfhb_config* config, double* out);
CFHB_API void cfhb_config_destroy(cfhb_config* config);

/* ---- campaigns -------------------------------------------------------- */

typedef struct cfhb_campaign_options {
    int has_seed;             /* nonzero: seed overrides the config's master_seed */
    uint64_t seed;
    int geometry_draws;       /* >= 1 */
    int first_geometry;       /* >= 0 */
    int blocks_per_geometry;  /* >= 1 */
    int dl_trials;            /* 0: max(100, blocks_per_geometry) */
    int power_opt;            /* run: add exact_mc_maxmin samples */
    const char* modes;        /* comma list of exact_mc, approx1, approx2, dl_exact_mc, dl_approx; NULL: exact_mc,approx2 */
    const char* power_utility;/* power-opt utility: exact_mc, approx1 or approx2; NULL: approx2 */
    int power_batch;          /* exact utility batch; 0: min(blocks, 100) */
    const char* output_dir;   /* NULL or "": nothing written */
} cfhb_campaign_options;

CFHB_API void cfhb_campaign_options_init(cfhb_campaign_options* options);

CFHB_API cfhb_status cfhb_run_campaign(const cfhb_config* config, const cfhb_campaign_options* options,
                                       cfhb_result** out);
CFHB_API cfhb_status cfhb_run_power_opt(const cfhb_config* config, const cfhb_campaign_options* options,
                                        cfhb_result** out);

typedef struct cfhb_mode_summary {
    const char* mode;
    size_t n_samples;
    double mean_se;
    double outage95_se;
    double median_se;
    double max_se;
} cfhb_mode_summary;

typedef struct cfhb_sample {
    int geometry_id;
    int64_t block_id;
    int user;
    const char* mode;
    double sinr_linear;
    double se_bps_hz;
} cfhb_sample;

CFHB_API size_t cfhb_result_mode_count(const cfhb_result* result);
CFHB_API cfhb_status cfhb_result_mode_summary(const cfhb_result* result, size_t index, cfhb_mode_summary* out);
/* Quantile q in [0, 1] of the pooled SE samples of one mode. */
CFHB_API cfhb_status cfhb_result_quantile(const cfhb_result* result, const char* mode, double q, double* out);
CFHB_API size_t cfhb_result_sample_count(const cfhb_result* result);
CFHB_API cfhb_status cfhb_result_sample(const cfhb_result* result, size_t index, cfhb_sample* out);
/* Power-opt records: one per geometry. */
CFHB_API size_t cfhb_result_power_count(const cfhb_result* result);
CFHB_API cfhb_status cfhb_result_power(const cfhb_result* result, size_t index, int* geometry_id, int* iterations,
                                       int* converged, const double** powers_mw, size_t* num_users);
/* samples.csv, summary.json and power.csv (when present) into dir. */
CFHB_API cfhb_status cfhb_result_write(const cfhb_result* result, const char* dir);
CFHB_API void cfhb_result_destroy(cfhb_result* result);

/* ---- validation ------------------------------------------------------- */

typedef struct cfhb_oracle_report {
    const char* check;
    const char* instance;
    double oracle;
    double artifact;
    double tolerance;
    int pass;
} cfhb_oracle_report;

CFHB_API cfhb_status cfhb_run_validation(uint64_t seed, int trials, int grid_resolution, cfhb_validation** out);
CFHB_API size_t cfhb_validation_count(const cfhb_validation* validation);
CFHB_API cfhb_status cfhb_validation_entry(const cfhb_validation* validation, size_t index, cfhb_oracle_report* out);
CFHB_API cfhb_status cfhb_validation_write_csv(const cfhb_validation* validation, const char* path);
CFHB_API void cfhb_validation_destroy(cfhb_validation* validation);

/* ---- scalar helpers --------------------------------------------------- */

/* prefactor * log2(1 + max(sinr, 0)). */
CFHB_API double cfhb_spectral_efficiency(double sinr, double prefactor);
/* Positive root of e (d + P c / (1 + e)) = P c n. */
CFHB_API cfhb_status cfhb_scalar_fixed_point(double P, double c, double d, double n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* CFHB_H */
