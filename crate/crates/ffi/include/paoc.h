/* C interface to the paoc anomaly-detection toolkit. */

#ifndef PAOC_H
#define PAOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum {
  PAOC_STATUS_OK = 0,
  /**
   * Bad arguments: null pointers, shape mismatches, invalid flags.
   */
  PAOC_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Filesystem failures.
   */
  PAOC_STATUS_IO = 2,
  /**
   * Unreadable CSV, schema, config, or checkpoint content.
   */
  PAOC_STATUS_PARSE = 3,
  /**
   * Non-finite values encountered during computation.
   */
  PAOC_STATUS_NUMERIC = 4,
  /**
   * A panic was caught at the boundary.
   */
  PAOC_STATUS_INTERNAL = 5,
} PaocStatus;

/**
 * A loaded model checkpoint. Opaque; create with `paoc_model_load`, destroy
 * with `paoc_model_free`.
 */
typedef struct PaocModel PaocModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *paoc_version(void);

/**
 * Message describing the most recent failure on this thread, or null if
 * none. The pointer stays valid until the next failing call on the same
 * thread; do not free it.
 */
const char *paoc_last_error_message(void);

/**
 * Load a checkpoint from disk.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_model` must be a valid
 * pointer to receive the handle.
 */
PaocStatus paoc_model_load(const char *path, PaocModel **out_model);

/**
 * Release a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must have come from `paoc_model_load` and not been freed.
 */
void paoc_model_free(PaocModel *model);

/**
 * Number of input features the model expects.
 *
 * # Safety
 * `model` and `out_dim` must be valid pointers.
 */
PaocStatus paoc_model_input_dim(const PaocModel *model, uintptr_t *out_dim);

/**
 * Whether the checkpoint carries a trained noise generator.
 *
 * # Safety
 * `model` must be a valid handle; null returns false.
 */
bool paoc_model_has_generator(const PaocModel *model);

/**
 * Reconstruction-error anomaly scores (per-sample squared error of the
 * main autoencoder). `data` is row-major `n_samples x n_features`;
 * `out_scores` must hold `n_samples` doubles.
 *
 * # Safety
 * `model`, `data`, and `out_scores` must be valid for the stated lengths.
 */
PaocStatus paoc_model_score(const PaocModel *model,
                            const double *data,
                            uintptr_t n_samples,
                            uintptr_t n_features,
                            double *out_scores);

/**
 * Generator-in-the-loop test scoring. `mode` is 1 for the clean-target
 * variant and 2 for the noisy-target variant.
 *
 * # Safety
 * Same as `paoc_model_score`.
 */
PaocStatus paoc_model_score_with_generator(const PaocModel *model,
                                           int32_t mode,
                                           const double *data,
                                           uintptr_t n_samples,
                                           uintptr_t n_features,
                                           double *out_scores);

/**
 * Train on an encoded CSV and write a checkpoint, mirroring the `train`
 * CLI subcommand. `config_path` and `telemetry_path` may be null; `mode`
 * is `learned`, `gaussian:SIGMA`, or `baseline`.
 *
 * # Safety
 * All non-null pointers must be NUL-terminated strings.
 */
PaocStatus paoc_train_csv(const char *data_path,
                          const char *config_path,
                          uint64_t seed,
                          const char *mode,
                          const char *out_checkpoint,
                          const char *telemetry_path);

/**
 * Tie-corrected ROC-AUC of anomaly scores against binary labels
 * (1 = anomalous).
 *
 * # Safety
 * `scores` and `labels` must hold `n` elements; `out_auc` must be valid.
 */
PaocStatus paoc_roc_auc(const double *scores, const uint8_t *labels, uintptr_t n, double *out_auc);

/**
 * F1, precision, and recall after flagging the top fraction of scores as
 * anomalous.
 *
 * # Safety
 * Same layout requirements as `paoc_roc_auc`; the three out pointers must
 * be valid.
 */
PaocStatus paoc_topk_metrics(const double *scores,
                             const uint8_t *labels,
                             uintptr_t n,
                             double fraction,
                             double *out_f1,
                             double *out_precision,
                             double *out_recall);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAOC_H */
