#ifndef URBANFUSE_H
#define URBANFUSE_H

/*
 * C interface to the urbanfuse library.
 *
 * Every object is an opaque handle released with its own *_free function.
 * Functions return UF_OK or an error code; uf_last_error() then holds a
 * description of the failure for the calling thread. Output parameters are
 * left untouched on failure.
 *
 * Strings returned through `const char**` are owned by the handle they came
 * from and stay valid until that handle is freed.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(UF_BUILDING_LIBRARY)
#    define UF_API __declspec(dllexport)
#  else
#    define UF_API __declspec(dllimport)
#  endif
#else
#  define UF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uf_status {
  UF_OK = 0,
  UF_ERR_INVALID_ARGUMENT = 1,
  UF_ERR_IO = 2,
  UF_ERR_FORMAT = 3,
  UF_ERR_DIMENSION = 4,
  UF_ERR_DATA = 5,
  UF_ERR_NUMERIC = 6,
  UF_ERR_STATE = 7,
  UF_ERR_INTERNAL = 8
} uf_status;

typedef enum uf_mode { UF_MODE_OVERHEAD = 0, UF_MODE_GROUND = 1, UF_MODE_MULTIMODAL = 2 } uf_mode;
typedef enum uf_pooling { UF_POOL_AVG = 0, UF_POOL_MAX = 1 } uf_pooling;
typedef enum uf_subset { UF_TRAIN = 0, UF_TEST = 1 } uf_subset;
typedef enum uf_sweep_param {
  UF_SWEEP_PCA_FRACTION = 0,
  UF_SWEEP_EMBEDDING_FRACTION = 1,
  UF_SWEEP_POWER = 2
} uf_sweep_param;

typedef struct uf_vocab uf_vocab;
typedef struct uf_dataset uf_dataset;
typedef struct uf_split uf_split;
typedef struct uf_model uf_model;
typedef struct uf_embedding uf_embedding;
typedef struct uf_index uf_index;
typedef struct uf_report uf_report;
typedef struct uf_summary uf_summary;

UF_API const char* uf_version(void);
UF_API const char* uf_status_string(uf_status status);
/* Message of the last failed call on this thread; "" if none. */
UF_API const char* uf_last_error(void);

/* Mode, pooling and sweep parameter names as used on the command line. */
UF_API uf_status uf_parse_mode(const char* text, uf_mode* out);
UF_API uf_status uf_parse_pooling(const char* text, uf_pooling* out);
UF_API uf_status uf_parse_sweep_param(const char* text, uf_sweep_param* out);
UF_API const char* uf_mode_name(uf_mode mode);
UF_API const char* uf_pooling_name(uf_pooling pooling);
UF_API const char* uf_sweep_param_name(uf_sweep_param param);

/* Shortest decimal text that reads back to the same double. */
UF_API uf_status uf_format_number(double value, char* buffer, size_t size);

/* ---- synthetic data ---------------------------------------------------- */

typedef struct uf_synth_config {
  size_t num_classes;
  size_t objects_per_class;
  size_t d_gsv;
  size_t d_oh;
  size_t latent_dim;
  size_t subtypes_per_class;
  size_t min_views;
  size_t max_views;
  double shared_signal;
  double exclusive_gsv;
  double exclusive_oh;
  double shared_nuisance;
  double noise_sigma;
  double feature_noise;
  double missing_ground_fraction;
  uint64_t seed;
} uf_synth_config;

UF_API void uf_synth_config_default(uf_synth_config* config);
/* Writes manifest.tsv, vocab.txt and features/ under out_dir. `out` may be NULL. */
UF_API uf_status uf_synth_generate(const uf_synth_config* config, const char* out_dir,
                                   uf_dataset** out);

/* ---- vocabulary and dataset -------------------------------------------- */

UF_API uf_status uf_vocab_load(const char* path, uf_vocab** out);
UF_API void uf_vocab_free(uf_vocab* vocab);
UF_API size_t uf_vocab_size(const uf_vocab* vocab);
UF_API uf_status uf_vocab_name(const uf_vocab* vocab, size_t label, const char** out);
UF_API uf_status uf_vocab_index_of(const uf_vocab* vocab, const char* name, size_t* out);

/* vocab_path may be NULL for vocab.txt next to the manifest. */
UF_API uf_status uf_dataset_load(const char* manifest_path, const char* vocab_path,
                                 uf_dataset** out);
UF_API void uf_dataset_free(uf_dataset* dataset);
UF_API size_t uf_dataset_size(const uf_dataset* dataset);
UF_API size_t uf_dataset_num_classes(const uf_dataset* dataset);
UF_API size_t uf_dataset_d_gsv(const uf_dataset* dataset);
UF_API size_t uf_dataset_d_oh(const uf_dataset* dataset);
/* Borrowed; valid while the dataset lives. */
UF_API const uf_vocab* uf_dataset_vocab(const uf_dataset* dataset);
UF_API uf_status uf_dataset_object_id(const uf_dataset* dataset, size_t index, const char** out);
UF_API uf_status uf_dataset_label(const uf_dataset* dataset, size_t index, size_t* out);
UF_API uf_status uf_dataset_ground_views(const uf_dataset* dataset, size_t index, size_t* out);
UF_API uf_status uf_dataset_find(const uf_dataset* dataset, const char* object_id, size_t* out);

/* ---- splits ------------------------------------------------------------- */

UF_API uf_status uf_split_stratified(const uf_dataset* dataset, uint64_t seed,
                                     double train_fraction, uf_split** out);
UF_API uf_status uf_split_load(const uf_dataset* dataset, const char* path, uf_split** out);
UF_API uf_status uf_split_save(const uf_split* split, const char* path);
UF_API void uf_split_free(uf_split* split);
UF_API uint64_t uf_split_seed(const uf_split* split);
UF_API size_t uf_split_count(const uf_split* split, uf_subset subset);
/* Subset of the dataset object at `index` (manifest order). */
UF_API uf_status uf_split_subset(const uf_split* split, size_t index, uf_subset* out);

/* ---- fusion head -------------------------------------------------------- */

typedef struct uf_train_config {
  size_t epochs;
  size_t batch_size;
  double lr0;
  double lr_decay_factor;
  size_t lr_decay_every;
  double momentum;
  uint64_t seed;
} uf_train_config;

UF_API void uf_train_config_default(uf_train_config* config);
UF_API double uf_learning_rate(const uf_train_config* config, size_t epoch);

/* Initializes from config->seed and trains on the split's train objects. */
UF_API uf_status uf_model_train(const uf_dataset* dataset, const uf_split* split, uf_mode mode,
                                uf_pooling pooling, const uf_train_config* config,
                                uf_model** out);
UF_API uf_status uf_model_save(const uf_model* model, const char* path);
UF_API uf_status uf_model_load(const char* path, uf_model** out);
UF_API void uf_model_free(uf_model* model);
UF_API uf_mode uf_model_mode(const uf_model* model);
UF_API size_t uf_model_num_classes(const uf_model* model);
/* Per-epoch mean training loss; empty for a loaded model. */
UF_API size_t uf_model_loss_trace(const uf_model* model, const double** out);

/* Fails with UF_ERR_DATA when the object lacks a modality the mode needs.
   `probabilities` may be NULL, otherwise it receives num_classes values. */
UF_API uf_status uf_model_predict_object(const uf_model* model, const uf_dataset* dataset,
                                         size_t index, uf_pooling pooling, size_t* label,
                                         double* probabilities);
/* ground holds n_views rows of d_gsv floats; either pointer may be NULL
   when the mode does not use it. Zero ground views for a mode that needs
   them is UF_ERR_DATA. */
UF_API uf_status uf_model_predict(const uf_model* model, const float* overhead, size_t d_oh,
                                  const float* ground, size_t n_views, size_t d_gsv,
                                  uf_pooling pooling, size_t* label, double* probabilities);

/* ---- embedding and retrieval -------------------------------------------- */

typedef struct uf_cca_params {
  double pca_fraction;
  double embedding_fraction;
  double power;
  double eta;
} uf_cca_params;

UF_API void uf_cca_params_default(uf_cca_params* params);

UF_API uf_status uf_embedding_fit(const uf_dataset* dataset, const uf_split* split,
                                  uf_pooling pooling, const uf_cca_params* params,
                                  uf_embedding** out);
UF_API uf_status uf_embedding_save(const uf_embedding* embedding, const char* path);
UF_API uf_status uf_embedding_load(const char* path, uf_embedding** out);
UF_API void uf_embedding_free(uf_embedding* embedding);
UF_API size_t uf_embedding_dim(const uf_embedding* embedding);
UF_API void uf_embedding_params(const uf_embedding* embedding, uf_cca_params* out);
/* Copies min(n, dim) eigenvalues, descending. */
UF_API size_t uf_embedding_eigenvalues(const uf_embedding* embedding, double* out, size_t n);

/* Index over the split's train objects that carry ground views. */
UF_API uf_status uf_index_build(const uf_embedding* embedding, const uf_dataset* dataset,
                                const uf_split* split, uf_pooling pooling, double power,
                                uf_index** out);
UF_API void uf_index_free(uf_index* index);
UF_API size_t uf_index_size(const uf_index* index);

typedef struct uf_neighbor {
  size_t row;
  const char* object_id; /* owned by the index */
  size_t label;
  double similarity;
} uf_neighbor;

/* Writes up to k neighbors to `out` (capacity k); *n_out receives the count. */
UF_API uf_status uf_index_query(const uf_index* index, const uf_embedding* embedding,
                                const float* overhead, size_t d_oh, size_t k, uf_neighbor* out,
                                size_t* n_out, int* zero_norm_query);
UF_API uf_status uf_index_query_object(const uf_index* index, const uf_embedding* embedding,
                                       const uf_dataset* dataset, size_t object, size_t k,
                                       uf_neighbor* out, size_t* n_out, int* zero_norm_query);

/* Multimodal head applied to the overhead feature and the mean aggregated
   ground feature of the k retrieved neighbors. */
UF_API uf_status uf_predict_missing(const uf_model* model, const uf_embedding* embedding,
                                    const uf_index* index, const float* overhead, size_t d_oh,
                                    size_t k, size_t* label, double* probabilities,
                                    int* zero_norm_query);
UF_API uf_status uf_predict_missing_object(const uf_model* model, const uf_embedding* embedding,
                                           const uf_index* index, const uf_dataset* dataset,
                                           size_t object, size_t k, size_t* label,
                                           double* probabilities, int* zero_norm_query);

/* Label coherence over the split's test objects for k = 1..k_max. The index
   size caps k_max; *n_out receives the number of entries written. */
UF_API uf_status uf_label_coherence(const uf_index* index, const uf_embedding* embedding,
                                    const uf_dataset* dataset, const uf_split* split,
                                    size_t k_max, double* hit_rate, double* mean_correct,
                                    size_t* n_out);

/* Nearest-neighbor-label accuracy (percent) for each value of `param`,
   the others held at `base`. */
UF_API uf_status uf_sweep(const uf_dataset* dataset, const uf_split* split, uf_pooling pooling,
                          const uf_cca_params* base, uf_sweep_param param, const double* values,
                          size_t n_values, double* accuracies);

/* ---- evaluation --------------------------------------------------------- */

UF_API uf_status uf_evaluate(const size_t* predictions, const size_t* truth, size_t n,
                             size_t num_classes, uf_report** out);
UF_API void uf_report_free(uf_report* report);
UF_API double uf_report_oa(const uf_report* report);
UF_API double uf_report_aa(const uf_report* report);
UF_API size_t uf_report_count(const uf_report* report);
/* Returns 0 and leaves *out alone when the class is absent from the truth. */
UF_API int uf_report_producer_accuracy(const uf_report* report, size_t label, double* out);
UF_API uint64_t uf_report_confusion(const uf_report* report, size_t truth, size_t predicted);
UF_API uf_status uf_report_write_csv(const uf_report* report, const char* path);
UF_API uf_status uf_report_write_text(const uf_report* report, const uf_vocab* vocab,
                                      const char* path);
UF_API uf_status uf_report_write_confusion(const uf_report* report, const uf_vocab* vocab,
                                           const char* path);

UF_API uf_status uf_summary_average(const uf_report* const* reports, size_t n, uf_summary** out);
UF_API void uf_summary_free(uf_summary* summary);
UF_API size_t uf_summary_splits(const uf_summary* summary);
UF_API void uf_summary_oa(const uf_summary* summary, double* mean, double* std);
UF_API void uf_summary_aa(const uf_summary* summary, double* mean, double* std);
UF_API uf_status uf_summary_write_csv(const uf_summary* summary, const char* path);
UF_API uf_status uf_summary_write_text(const uf_summary* summary, const uf_vocab* vocab,
                                       const char* path);
UF_API uf_status uf_summary_write_confusion(const uf_summary* summary, const uf_vocab* vocab,
                                            const char* path);

#ifdef __cplusplus
}
#endif

#endif
