#ifndef EEGSWEEP_H
#define EEGSWEEP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define EEG_N_LABELS 5

#define EEG_N_CHANNELS 4

#define EEG_N_FEATURES 20

typedef enum {
  EEG_STATUS_OK = 0,
  EEG_STATUS_NULL_POINTER = 1,
  EEG_STATUS_INVALID_ARGUMENT = 2,
  EEG_STATUS_IO = 3,
  EEG_STATUS_PARSE = 4,
  EEG_STATUS_DATA = 5,
  EEG_STATUS_PANIC = 6,
} EegStatus;

typedef enum {
  EEG_CLASSIFIER_BAGGING = 0,
  EEG_CLASSIFIER_RANDOM_FOREST = 1,
  EEG_CLASSIFIER_GBOOST = 2,
} EegClassifier;

/**
 * Opaque feature table.
 */
typedef struct EegDataset EegDataset;

/**
 * Opaque trained ensemble.
 */
typedef struct EegModel EegModel;

/**
 * Training options. Zero in `max_depth` or `mtry` selects the default.
 */
typedef struct {
  uint32_t n_trees;
  uint32_t max_depth;
  uint32_t mtry;
  uint64_t seed;
} EegTrainOptions;

typedef struct {
  double accuracy;
  double macro_precision;
  double macro_recall;
  double macro_f1;
  size_t n_test;
} EegMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *eeg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eeg_version(void);

/**
 * Load a feature table written by `eegsweep features`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
EegStatus eeg_dataset_read_csv(const char *path, EegDataset **out);

/**
 * # Safety
 * `ds` must come from [`eeg_dataset_read_csv`] and `rows`, `features` must be writable.
 */
EegStatus eeg_dataset_shape(const EegDataset *ds, size_t *rows, size_t *features);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void eeg_dataset_free(EegDataset *ds);

/**
 * Train on the `k`-interval training rows of `ds`.
 *
 * # Safety
 * `ds` must be a live dataset handle, `opts` null or valid, `out` writable.
 */
EegStatus eeg_model_train(const EegDataset *ds,
                          EegClassifier classifier,
                          size_t k,
                          const EegTrainOptions *opts,
                          EegModel **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
EegStatus eeg_model_load_json(const char *path, EegModel **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
EegStatus eeg_model_save_json(const EegModel *model, const char *path);

/**
 * Predicted label index for one feature vector of length `n`.
 *
 * # Safety
 * `features` must point to `n` doubles and `label` must be writable.
 */
EegStatus eeg_model_predict(const EegModel *model,
                            const double *features,
                            size_t n,
                            uint32_t *label);

/**
 * Class probabilities for one feature vector, written to `proba[0..5]` in
 * canonical label order; labels the model never saw get 0.
 *
 * # Safety
 * `features` must point to `n` doubles and `proba` to `EEG_N_LABELS` writable doubles.
 */
EegStatus eeg_model_predict_proba(const EegModel *model,
                                  const double *features,
                                  size_t n,
                                  double *proba);

/**
 * Score `model` on the `k`-interval test rows of `ds`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
EegStatus eeg_evaluate(const EegModel *model, const EegDataset *ds, size_t k, EegMetrics *out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void eeg_model_free(EegModel *model);

/**
 * Default band powers of one window. `samples` holds `EEG_N_CHANNELS`
 * channel-major runs of `n` samples each, `n` a power of two; `out`
 * receives `EEG_N_FEATURES` values in feature-column order.
 *
 * # Safety
 * `samples` must point to `4 * n` doubles and `out` to `EEG_N_FEATURES` writable doubles.
 */
EegStatus eeg_band_powers(const double *samples, size_t n, double sample_rate_hz, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EEGSWEEP_H */
