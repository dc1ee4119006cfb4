// ----------------------------------------------------------------------------
// Copyright 2026 The rulprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#ifndef RULPRIOR_RULPRIOR_H_
#define RULPRIOR_RULPRIOR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RP_API __declspec(dllexport)
#else
#define RP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rp_status {
  RP_OK = 0,
  RP_ERR_USAGE = 1,       /* bad configuration or arguments */
  RP_ERR_VALIDATION = 2,  /* bad input data, files or artifacts */
  RP_ERR_NUMERIC = 3      /* non-finite loss, non-convergence */
} rp_status;

typedef struct rp_config rp_config;
typedef struct rp_model rp_model;
typedef struct rp_library rp_library;

/* Progress lines from the pipeline stages. */
typedef void (*rp_log_fn)(const char* line, void* user);

RP_API const char* rp_version(void);

/* Message of the last failure on the calling thread; "" if none. */
RP_API const char* rp_last_error(void);

/* config_path may be NULL. keys/values hold n flag overrides named like the
   CLI flags without dashes ("epochs", "k", ...); they win over the file. */
RP_API rp_status rp_config_resolve(const char* config_path, const char* const* keys,
                                   const char* const* values, size_t n, rp_config** out);
RP_API void rp_config_free(rp_config* config);
/* Copies the value of key into buf, truncating; *needed (optional) gets the
   full length including the terminator. */
RP_API rp_status rp_config_get(const rp_config* config, const char* key, char* buf, size_t size,
                               size_t* needed);

RP_API rp_status rp_cmd_preprocess(const rp_config* config, rp_log_fn log, void* user);
RP_API rp_status rp_cmd_train(const rp_config* config, rp_log_fn log, void* user);
RP_API rp_status rp_cmd_build_library(const rp_config* config, rp_log_fn log, void* user);
RP_API rp_status rp_cmd_predict(const rp_config* config, rp_log_fn log, void* user);
RP_API rp_status rp_cmd_evaluate(const rp_config* config, rp_log_fn log, void* user);

/* Writes train_<tag>.txt, test_<tag>.txt and RUL_<tag>.txt into dir. */
RP_API rp_status rp_synth(const char* dir, const char* tag, uint64_t seed, size_t train_units,
                          size_t test_units);

RP_API rp_status rp_kl(const double* p, const double* q, size_t n, double* out);
RP_API rp_status rp_js(const double* p, const double* q, size_t n, double* out);
RP_API rp_status rp_rmse(const double* predicted, const double* truth, size_t n, double* out);
RP_API rp_status rp_phm_score(const double* predicted, const double* truth, size_t n, double* out);

RP_API rp_status rp_model_load(const char* path, rp_model** out);
RP_API void rp_model_free(rp_model* model);
RP_API size_t rp_model_window_length(const rp_model* model);
RP_API size_t rp_model_features(const rp_model* model);
RP_API size_t rp_model_codebook_size(const rp_model* model);
RP_API size_t rp_model_latent_sequences(const rp_model* model);
/* window: rows x cols normalized values, row-major. */
RP_API rp_status rp_model_predict(const rp_model* model, const double* window, size_t rows,
                                  size_t cols, double* out);
/* states must hold rp_model_latent_sequences() entries. */
RP_API rp_status rp_model_latent_states(const rp_model* model, const double* window, size_t rows,
                                        size_t cols, size_t* states);

RP_API rp_status rp_library_load(const char* path, rp_library** out);
RP_API void rp_library_free(rp_library* library);
RP_API size_t rp_library_size(const rp_library* library);
RP_API size_t rp_library_states(const rp_library* library);
/* Mean RUL of the k nearest entries to pi (length rp_library_states()). */
RP_API rp_status rp_library_query(const rp_library* library, const double* pi, size_t n, size_t k,
                                  double* out);

#ifdef __cplusplus
}
#endif

#endif  // RULPRIOR_RULPRIOR_H_
