/*
 * rdict: reverse-dictionary engine, C interface.
 *
 * All objects are opaque handles created by an rd_*_create / rd_*_load call
 * and released with the matching rd_*_free. Every fallible function returns
 * an rd_status; on failure, rd_last_error() returns a message describing the
 * most recent failure on the calling thread.
 */
#ifndef RDICT_RDICT_H
#define RDICT_RDICT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RDICT_BUILDING_LIBRARY)
#    define RDICT_API __declspec(dllexport)
#  else
#    define RDICT_API __declspec(dllimport)
#  endif
#else
#  define RDICT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rd_status {
  RD_OK = 0,
  RD_ERR_INVALID_ARGUMENT = 1,
  RD_ERR_DIMENSION_MISMATCH = 2,
  RD_ERR_INVALID_STATE = 3,
  RD_ERR_CORRUPT_CHECKPOINT = 4,
  RD_ERR_PARSE = 5,
  RD_ERR_SCHEMA = 6,
  RD_ERR_EMPTY_DATASET = 7,
  RD_ERR_NUMERIC = 8,
  RD_ERR_DEGENERATE_VECTOR = 9,
  RD_ERR_MISSING_GOLD = 10,
  RD_ERR_CONFIG = 11,
  RD_ERR_IO = 12,
  RD_ERR_BRIDGE = 13,
  RD_ERR_INTERNAL = 14
} rd_status;

typedef struct rd_model rd_model;
typedef struct rd_index rd_index;
typedef struct rd_dataset rd_dataset;
typedef struct rd_linter rd_linter;
typedef struct rd_server rd_server;

/* Library version, e.g. "0.1.0". */
RDICT_API const char* rd_version(void);
/* Stable kebab-case name of a status, e.g. "schema-error". */
RDICT_API const char* rd_status_name(rd_status status);
/* Message for the last failure on this thread; "" if none. */
RDICT_API const char* rd_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
RDICT_API void rd_string_free(char* s);

/* ---- model ------------------------------------------------------------ */

RDICT_API rd_status rd_model_create(uint32_t d, uint32_t b, uint32_t s, double dropout_rate,
                                    uint64_t init_seed, rd_model** out);
RDICT_API rd_status rd_model_load(const char* path, rd_model** out);
RDICT_API rd_status rd_model_save(const rd_model* model, const char* path);
RDICT_API void rd_model_free(rd_model* model);

RDICT_API rd_status rd_model_dims(const rd_model* model, uint32_t* d, uint32_t* b, uint32_t* s);
RDICT_API uint64_t rd_model_param_count(const rd_model* model);

/* Eval-mode forward of one vector: `in` has in_len == d, `out` has out_len == b. */
RDICT_API rd_status rd_model_predict(const rd_model* model, const double* in, size_t in_len,
                                     double* out, size_t out_len);

/* ---- data ------------------------------------------------------------- */

RDICT_API rd_status rd_dataset_load(const char* path, rd_dataset** out);
RDICT_API void rd_dataset_free(rd_dataset* dataset);
RDICT_API size_t rd_dataset_size(const rd_dataset* dataset);

/* ---- retrieval -------------------------------------------------------- */

/* Builds an index from a vocabulary JSONL file ("word" and "word_emb" required). */
RDICT_API rd_status rd_index_load(const char* vocab_path, rd_index** out);
RDICT_API void rd_index_free(rd_index* index);
RDICT_API size_t rd_index_size(const rd_index* index);
RDICT_API size_t rd_index_dim(const rd_index* index);

typedef struct rd_hit {
  const char* word; /* valid for the lifetime of the index */
  double similarity;
  uint64_t vocab_index;
} rd_hit;

/*
 * Maps a definition vector through the model and writes the best min(k, |V|)
 * words to `hits` (capacity `capacity`, which must be >= min(k, |V|)).
 */
RDICT_API rd_status rd_query(const rd_model* model, const rd_index* index,
                             const double* definition_vec, size_t len, size_t k, rd_hit* hits,
                             size_t capacity, size_t* n_hits);

/*
 * Fetches a definition vector for `text` from an embedding bridge
 * (POST <bridge_url>/embed). Writes up to `capacity` values and the true
 * length to `*len`.
 */
RDICT_API rd_status rd_bridge_embed(const char* bridge_url, const char* text, double* out,
                                    size_t capacity, size_t* len);

/* ---- training --------------------------------------------------------- */

/*
 * Trains from a JSONL dataset and a JSON config file. `val_path` may be NULL.
 * `checkpoint_out` overrides the config's checkpoint_path when non-NULL. The
 * epoch history is written as JSONL to `history_out` when non-NULL.
 */
RDICT_API rd_status rd_train_files(const char* data_path, const char* val_path,
                                   const char* config_path, const char* checkpoint_out,
                                   const char* history_out);

/* ---- evaluation ------------------------------------------------------- */

typedef struct rd_eval_report {
  uint64_t n_items;
  double mse;
  double mse_per_dim;
  double mean_cosine;
  double mean_rank;
  double median_rank;
  double top1;
  double top10;
  double top100;
} rd_eval_report;

RDICT_API rd_status rd_evaluate(const rd_model* model, const rd_dataset* test,
                                const rd_index* index, rd_eval_report* out);

/* Evaluates and writes the report JSON to `report_path` (when non-NULL); the
 * JSON text is also returned through `json_out` when non-NULL. */
RDICT_API rd_status rd_evaluate_to_file(const rd_model* model, const rd_dataset* test,
                                        const rd_index* index, const char* language_tag,
                                        const char* report_path, char** json_out);

/* ---- lint ------------------------------------------------------------- */

/* `config_path` may be NULL for the built-in lexicons. */
RDICT_API rd_status rd_linter_create(const char* config_path, rd_linter** out);
RDICT_API void rd_linter_free(rd_linter* linter);

/* Lints one (word, gloss) pair; the row JSON is returned through `json_out`. */
RDICT_API rd_status rd_lint_entry(const rd_linter* linter, const char* word, const char* gloss,
                                  char** json_out);

/* Lints a dataset: one JSONL row per entry with a gloss to `rows_path`, and
 * the histogram summary object as the final line of `summary_path`. */
RDICT_API rd_status rd_lint_dataset(const rd_linter* linter, const rd_dataset* dataset,
                                    const char* rows_path, const char* summary_path,
                                    char** summary_json_out);

/* ---- service ---------------------------------------------------------- */

typedef struct rd_server_config {
  const char* host;          /* NULL: 127.0.0.1 */
  int port;                  /* 0: pick a free port */
  const char* checkpoint_path;
  const char* vocab_path;
  const char* bridge_url;    /* NULL: /query_text answers 503 */
  size_t max_k;              /* 0: 100 */
  const char* lint_config_path; /* NULL: built-in lexicons */
} rd_server_config;

/* Loads model and vocabulary and binds the port. Fails with RD_ERR_IO if the
 * port is busy. */
RDICT_API rd_status rd_server_create(const rd_server_config* cfg, rd_server** out);
RDICT_API int rd_server_port(const rd_server* server);
/* Blocks serving requests until rd_server_stop is called from another thread. */
RDICT_API rd_status rd_server_run(rd_server* server);
RDICT_API void rd_server_stop(rd_server* server);
RDICT_API void rd_server_free(rd_server* server);

#ifdef __cplusplus
}
#endif

#endif /* RDICT_RDICT_H */
