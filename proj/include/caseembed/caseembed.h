/*
 * Copyright 2026 The caseembed Authors
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

/*
 * C interface to the caseembed library.
 *
 * Objects are opaque handles created by ce_*_load / ce_*_compute / ... and
 * released with the matching ce_*_free. Every fallible call returns a
 * ce_status; on failure ce_last_error() describes the problem (the message
 * is per-thread and valid until the next failing call on that thread).
 */
#ifndef CASEEMBED_H_
#define CASEEMBED_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CASEEMBED_BUILDING)
#    define CE_API __declspec(dllexport)
#  else
#    define CE_API __declspec(dllimport)
#  endif
#else
#  define CE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ce_status {
  CE_OK = 0,
  CE_ERR_INVALID_ARGUMENT = 1,
  CE_ERR_IO = 2,
  CE_ERR_PARSE = 3,
  CE_ERR_MISSING_SECTOR = 4,
  CE_ERR_RAGGED_SERIES = 5,
  CE_ERR_DUPLICATE_ROW = 6,
  CE_ERR_INSUFFICIENT_HISTORY = 7,
  CE_ERR_WINDOW_LONGER_THAN_SERIES = 8,
  CE_ERR_DEGENERATE_SCALING = 9,
  CE_ERR_DIVERGED = 10,
  CE_ERR_DIMENSION_MISMATCH = 11,
  CE_ERR_INTERNAL = 99
} ce_status;

typedef enum ce_granularity { CE_DAILY = 0, CE_WEEKLY = 1, CE_MONTHLY = 2 } ce_granularity;
typedef enum ce_aggregation { CE_AGG_COMPOUND = 0, CE_AGG_SUM = 1 } ce_aggregation;
typedef enum ce_metric_kind { CE_EUCLIDEAN = 0, CE_PEARSON = 1, CE_HYBRID = 2 } ce_metric_kind;
typedef enum ce_representation {
  CE_REP_SUMMARY = 0,
  CE_REP_RAW = 1,
  CE_REP_EMBEDDING = 2
} ce_representation;
typedef enum ce_knn_metric { CE_KNN_EUCLIDEAN = 0, CE_KNN_PEARSON = 1 } ce_knn_metric;

typedef struct ce_metric {
  int kind;             /* ce_metric_kind */
  double hybrid_weight; /* used by CE_HYBRID only */
} ce_metric;

typedef struct ce_factorize_config {
  uint32_t d;
  double lambda;
  double learning_rate;
  uint32_t epochs;
  uint64_t seed;
  double tolerance;
} ce_factorize_config;

typedef struct ce_experiment_config {
  int representation; /* ce_representation */
  ce_metric countmat_metric;
  int knn_metric;  /* ce_knn_metric */
  int granularity; /* ce_granularity */
  uint32_t lookback;
  uint32_t k_count;
  uint32_t knn_k;
  uint32_t folds;
  uint64_t seed;
  int stratified;
  ce_factorize_config factorize;
} ce_experiment_config;

typedef struct ce_panel ce_panel;
typedef struct ce_countmat ce_countmat;
typedef struct ce_embedding ce_embedding;

CE_API const char* ce_version(void);
CE_API const char* ce_last_error(void);
CE_API const char* ce_status_name(ce_status status);

/* Parses "euclidean" | "pearson" | "hybrid" | "hybrid@<w>" | E | P | H. */
CE_API ce_status ce_metric_parse(const char* text, ce_metric* out);
CE_API ce_status ce_granularity_parse(const char* text, int* out);
CE_API ce_status ce_representation_parse(const char* text, int* out);
CE_API ce_status ce_knn_metric_parse(const char* text, int* out);

/* ---- returns panel ---- */
CE_API ce_status ce_panel_load(const char* returns_csv, const char* meta_csv,
                               int granularity, ce_panel** out);
CE_API ce_status ce_panel_aggregate(const ce_panel* panel, int target, int mode,
                                    ce_panel** out);
/* meta_csv may be NULL. */
CE_API ce_status ce_panel_write(const ce_panel* panel, const char* returns_csv,
                                const char* meta_csv);
CE_API size_t ce_panel_num_assets(const ce_panel* panel);
CE_API size_t ce_panel_num_periods(const ce_panel* panel);
CE_API size_t ce_panel_num_classes(const ce_panel* panel);
CE_API int ce_panel_granularity(const ce_panel* panel);
CE_API const char* ce_panel_ticker(const ce_panel* panel, size_t index);
CE_API const char* ce_panel_sector(const ce_panel* panel, size_t index);
CE_API double ce_panel_return(const ce_panel* panel, size_t asset, size_t t);
/* Writes 64 hex characters plus NUL. */
CE_API ce_status ce_panel_digest(const ce_panel* panel, char out[65]);
CE_API void ce_panel_free(ce_panel* panel);

/* ---- count matrix ---- */
/* threads = 0 picks one worker per hardware thread. zero_variance may be NULL. */
CE_API ce_status ce_countmat_compute(const ce_panel* panel, size_t lookback, size_t k,
                                     ce_metric metric, unsigned threads, ce_countmat** out,
                                     size_t* zero_variance);
CE_API ce_status ce_countmat_read(const char* path, ce_countmat** out);
CE_API ce_status ce_countmat_write(const ce_countmat* cm, const char* path);
CE_API size_t ce_countmat_size(const ce_countmat* cm);
CE_API size_t ce_countmat_k(const ce_countmat* cm);
CE_API size_t ce_countmat_lookback(const ce_countmat* cm);
CE_API size_t ce_countmat_tvalid(const ce_countmat* cm);
CE_API int ce_countmat_granularity(const ce_countmat* cm);
CE_API ce_metric ce_countmat_metric(const ce_countmat* cm);
CE_API uint32_t ce_countmat_get(const ce_countmat* cm, size_t i, size_t j);
CE_API void ce_countmat_free(ce_countmat* cm);

/* ---- embeddings ---- */
CE_API ce_factorize_config ce_factorize_default_config(void);
/* The clipped/transformed/scaled target is built from the count matrix. */
CE_API ce_status ce_embed_train(const ce_countmat* cm, const ce_factorize_config* cfg,
                                ce_embedding** out);
/* Rows are labelled with the panel's tickers. meta_path may be NULL. */
CE_API ce_status ce_embedding_write(const ce_embedding* e, const ce_panel* panel,
                                    const char* csv_path, const char* meta_path);
/* Reorders rows to panel order; every panel ticker must be present. */
CE_API ce_status ce_embedding_read(const char* csv_path, const char* meta_path,
                                   const ce_panel* panel, ce_embedding** out);
CE_API size_t ce_embedding_size(const ce_embedding* e);
CE_API size_t ce_embedding_dim(const ce_embedding* e);
CE_API double ce_embedding_get(const ce_embedding* e, size_t i, size_t k);
CE_API double ce_embedding_final_loss(const ce_embedding* e);
CE_API size_t ce_embedding_epochs_run(const ce_embedding* e);
CE_API void ce_embedding_free(ce_embedding* e);

/* ---- classification ---- */
/* Leave-one-out kNN for the named query tickers (all assets when
 * n_queries == 0). Writes the neighbour-explanation CSV when csv_path is
 * non-NULL; accuracy may be NULL. embeddings is required for
 * CE_REP_EMBEDDING and must be NULL otherwise. */
CE_API ce_status ce_classify(const ce_panel* panel, int representation,
                             const ce_embedding* embeddings, int knn_metric, size_t knn_k,
                             const char* const* queries, size_t n_queries,
                             const char* csv_path, double* accuracy);
/* Table-style neighbour listing with sector and industry. Release the text
 * with ce_string_free. */
CE_API ce_status ce_explain(const ce_panel* panel, int representation,
                            const ce_embedding* embeddings, int knn_metric, size_t knn_k,
                            const char* const* queries, size_t n_queries, char** text);
CE_API void ce_string_free(char* text);

/* ---- evaluation ---- */
CE_API ce_experiment_config ce_experiment_default_config(void);
/* Writes the 27 reference configurations into out (cap >= 27); returns the
 * number of configurations. */
CE_API size_t ce_reference_grid(const ce_experiment_config* base, ce_experiment_config* out,
                            size_t cap);
/* cache_dir, report_json, results_csv and weighted_prf may be NULL.
 * weighted_prf receives precision, recall, f1. */
CE_API ce_status ce_evaluate(const ce_panel* panel, const ce_experiment_config* cfg,
                             const char* cache_dir, unsigned threads, const char* report_json,
                             const char* results_csv, double weighted_prf[3]);
/* Failing configurations go to errors_csv (may be NULL); the call itself
 * succeeds unless an output cannot be written. */
CE_API ce_status ce_grid(const ce_panel* panel, const ce_experiment_config* configs,
                         size_t n_configs, const char* cache_dir, unsigned threads,
                         const char* results_csv, const char* errors_csv, size_t* n_rows,
                         size_t* n_errors);

/* ---- similarity graph ---- */
/* Any output path may be NULL. */
CE_API ce_status ce_export_graph(const ce_embedding* e, const ce_panel* panel,
                                 double threshold, const char* edges_csv,
                                 const char* nodes_csv, const char* gexf_path,
                                 const char* outliers_csv, size_t* n_edges,
                                 double* overall_purity);

/* ---- misc ---- */
CE_API ce_status ce_file_sha256(const char* path, char out[65]);
CE_API ce_status ce_sha256(const void* data, size_t len, char out[65]);

#ifdef __cplusplus
}
#endif

#endif /* CASEEMBED_H_ */
