/* C interface to the recfair toolkit. All functions return RF_OK or an
 * error code; rf_last_error() holds a thread-local message for the most
 * recent failure. Handles are opaque and freed with the matching _free
 * call. Structured options and results travel as JSON strings. */

#ifndef RECFAIR_H
#define RECFAIR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RF_API __declspec(dllexport)
#else
#define RF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
  RF_OK = 0,
  RF_ERROR_CONFIG = 1,
  RF_ERROR_DATA = 2,
  RF_ERROR_RUN = 3,
} rf_status;

typedef enum rf_matrix_kind {
  RF_MATRIX_RATINGS = 0,
  RF_MATRIX_PERCENTILES = 1,
} rf_matrix_kind;

typedef struct rf_matrix rf_matrix;
typedef struct rf_model rf_model;
typedef struct rf_recs rf_recs;

typedef struct rf_matrix_info {
  int32_t n_users;
  int32_t n_items;
  int64_t n_entries;
  int32_t kind; /* rf_matrix_kind */
} rf_matrix_info;

RF_API const char* rf_version(void);
RF_API const char* rf_last_error(void);
RF_API void rf_string_free(char* s);

/* opts_json: {"delimiter": "\t", "skip_header": false, "scale": [1,...]} ;
 * NULL means defaults. */
RF_API rf_status rf_matrix_load(const char* path, const char* opts_json,
                                rf_matrix** out);
RF_API rf_status rf_matrix_synthetic(const char* params_json, rf_matrix** out);
RF_API rf_status rf_matrix_save(const rf_matrix* m, const char* path,
                                const char* opts_json);
RF_API rf_status rf_matrix_save_id_maps(const rf_matrix* m,
                                        const char* users_path,
                                        const char* items_path);
RF_API rf_status rf_matrix_info_get(const rf_matrix* m, rf_matrix_info* out);
RF_API rf_status rf_matrix_kcore(const rf_matrix* m, int32_t min_user_ratings,
                                 int32_t min_item_ratings, rf_matrix** out);
RF_API rf_status rf_matrix_split(const rf_matrix* m, double ratio,
                                 uint64_t seed, rf_matrix** train,
                                 rf_matrix** test);
RF_API rf_status rf_matrix_percentile(const rf_matrix* m, rf_matrix** out);
RF_API rf_status rf_matrix_flip_positivity(const rf_matrix* m, double beta,
                                           rf_matrix** out);
/* Writes lorenz.csv, rating_hist.csv, item_stats.csv into out_dir. */
RF_API rf_status rf_matrix_diagnose(const rf_matrix* m, const char* out_dir);
RF_API void rf_matrix_free(rf_matrix* m);

/* config_json: {"algorithm": "BiasedMF", "factors": 30, ...} */
RF_API rf_status rf_train(const rf_matrix* train, const char* config_json,
                          rf_model** out);
RF_API rf_status rf_model_save(const rf_model* m, const char* path);
RF_API rf_status rf_model_load(const char* path, rf_model** out);
RF_API void rf_model_free(rf_model* m);

RF_API rf_status rf_recommend(const rf_model* m, int32_t k,
                              int32_t exclude_train, rf_recs** out);
RF_API rf_status rf_recs_save(const rf_recs* r, const char* path);
/* context provides the label -> internal id mapping. */
RF_API rf_status rf_recs_load(const char* path, const rf_matrix* context,
                              rf_recs** out);
RF_API void rf_recs_free(rf_recs* r);

/* config_json: {"method": "DM", "K": 10, ...}; train supplies the head/tail
 * segmentation and user profiles. runtime_seconds may be NULL. */
RF_API rf_status rf_rerank(const rf_recs* initial, const rf_matrix* train,
                           const char* config_json, rf_recs** out,
                           double* runtime_seconds);

/* opts_json: {"alphas": [1,5], "head_fraction": 0.2, "labels": {...}};
 * report_json receives a malloc'd JSON document (rf_string_free). */
RF_API rf_status rf_evaluate(const rf_recs* recs, const rf_matrix* test,
                             const rf_matrix* train, const char* opts_json,
                             char** report_json);

/* Full study driver; config_json is the harness config document. */
RF_API rf_status rf_study_run(const char* config_json, const char* out_dir,
                              int32_t jobs, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* RECFAIR_H */
