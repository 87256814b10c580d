/* Copyright 2026 The CSDS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
/* C interface to the dance synthesis library.
 *
 * Every function returns a csds_status. On failure a description is
 * available from csds_last_error() on the calling thread until the next
 * call into the library. Config arguments are JSON documents in the
 * RunConfig layout ({"model", "train", "loss", "synth", "eval"}); NULL or ""
 * means all defaults. Output files are written atomically. */
#ifndef CSDS_CSDS_H_
#define CSDS_CSDS_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CSDS_API __attribute__((visibility("default")))
#else
#define CSDS_API
#endif

typedef enum csds_status {
  CSDS_OK = 0,
  CSDS_ERR_USAGE = 1,    /* bad argument or handle */
  CSDS_ERR_DATA = 2,     /* invalid config, corpus or model contents */
  CSDS_ERR_IO = 3,       /* unreadable or unwritable file, corrupt checkpoint */
  CSDS_ERR_INTERNAL = 4
} csds_status;

typedef struct csds_model csds_model;

/* Called after every training epoch. */
typedef void (*csds_epoch_fn)(size_t epoch, double total_loss, void* user);

CSDS_API const char* csds_version(void);
CSDS_API const char* csds_last_error(void);
CSDS_API void csds_string_free(char* s);

/* Validates a config and returns the effective config (defaults filled in). */
CSDS_API csds_status csds_config_effective(const char* config_json, char** out_json);

CSDS_API csds_status csds_synth_corpus(const char* config_json, const char* out_path);

/* Trains for train.epochs epochs. With resume_path set, training continues
 * from that checkpoint and its configuration wins over config_json except
 * for train.epochs. */
CSDS_API csds_status csds_train(const char* corpus_path, const char* config_json,
                                const char* resume_path, const char* out_path,
                                csds_epoch_fn on_epoch, void* user);

CSDS_API csds_status csds_model_load(const char* checkpoint_path, csds_model** out);
CSDS_API void csds_model_free(csds_model* model);
/* Checkpoint header fields as JSON: model, train, loss_weights, history, run_config. */
CSDS_API csds_status csds_model_info(const csds_model* model, char** out_json);

/* {"clip", "style", "attn", "embedding"} for one corpus clip. */
CSDS_API csds_status csds_embed(const csds_model* model, const char* corpus_path,
                                const char* clip_id, const char* out_path);

/* Dances to every music record of music_path in order, chaining each clip's
 * initial latent from the previous clip's last pose. The style comes from
 * style_clip_id (looked up in style_corpus_path, or in music_path when that
 * is NULL) or from style_file, an embed output. Exactly one of the two must
 * be given. The first clip starts from a standard-normal latent drawn with
 * `seed`. Output is corpus NDJSON, one record per input clip. */
CSDS_API csds_status csds_generate(const csds_model* model, const char* music_path,
                                   const char* style_corpus_path, const char* style_clip_id,
                                   const char* style_file, uint64_t seed, const char* out_path);

CSDS_API csds_status csds_evaluate(const csds_model* model, const char* corpus_path,
                                   const char* config_json, const char* report_path);

/* PCA of the corpus clips' style embeddings. Written as CSV when out_path
 * ends in ".csv", JSON otherwise. */
CSDS_API csds_status csds_pca(const csds_model* model, const char* corpus_path,
                              const char* config_json, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* CSDS_CSDS_H_ */
