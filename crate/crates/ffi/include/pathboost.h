#ifndef PATHBOOST_H
#define PATHBOOST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PbTask {
  PB_TASK_CLASSIFICATION = 0,
  PB_TASK_REGRESSION = 1,
} PbTask;

typedef enum PbStatus {
  PB_STATUS_OK = 0,
  /**
   * Input data could not be read or is malformed.
   */
  PB_STATUS_DATA = 2,
  /**
   * A model file or string is unusable.
   */
  PB_STATUS_MODEL = 3,
  /**
   * Bad configuration or training setup.
   */
  PB_STATUS_CONFIG = 4,
  /**
   * Null pointer, invalid UTF-8 or a buffer of the wrong size.
   */
  PB_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The engine panicked. This is a bug.
   */
  PB_STATUS_INTERNAL = 6,
} PbStatus;

/**
 * A loaded dataset.
 */
typedef struct PbDataset PbDataset;

/**
 * A trained model.
 */
typedef struct PbModel PbModel;

/**
 * Training parameters. Start from [`pb_train_params_default`].
 */
typedef struct PbTrainParams {
  enum PbTask task;
  size_t m_stop;
  double eta;
  size_t max_depth;
  size_t min_leaf;
  /**
   * In edges.
   */
  size_t max_path_length;
  /**
   * Counts only instead of counts plus averaged attributes.
   */
  bool restricted;
  uint64_t seed;
} PbTrainParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pb_last_error(void);

struct PbTrainParams pb_train_params_default(void);

/**
 * Load a TUDataset directory. `name` may be null to use the directory name.
 * `target_index` picks the `_graph_attributes` column for regression.
 *
 * # Safety
 * `dir` and `name` must be null or NUL-terminated strings; `out` must be
 * writable.
 */
enum PbStatus pb_dataset_load(const char *dir,
                              const char *name,
                              enum PbTask task,
                              size_t target_index,
                              struct PbDataset **out);

/**
 * Number of graphs, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t pb_dataset_len(const struct PbDataset *ds);

/**
 * Copy the targets into `out`, which must hold `len == pb_dataset_len` values.
 *
 * # Safety
 * `ds` must be a live handle and `out` must point to `len` writable doubles.
 */
enum PbStatus pb_dataset_targets(const struct PbDataset *ds, double *out, size_t len);

/**
 * # Safety
 * `ds` must be null or a handle not freed before.
 */
void pb_dataset_free(struct PbDataset *ds);

/**
 * Train with automatic anchor selection.
 *
 * # Safety
 * `ds` must be a live handle, `params` readable and `out` writable.
 */
enum PbStatus pb_model_train(const struct PbDataset *ds,
                             const struct PbTrainParams *params,
                             struct PbModel **out);

/**
 * Raw scores for every graph of `ds`: logits for classification, values for
 * regression. `out` must hold `len == pb_dataset_len(ds)` values.
 *
 * # Safety
 * Handles must be live and `out` must point to `len` writable doubles.
 */
enum PbStatus pb_model_predict(const struct PbModel *model,
                               const struct PbDataset *ds,
                               double *out,
                               size_t len);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
enum PbTask pb_model_task(const struct PbModel *model);

/**
 * Number of boosting stages, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t pb_model_stage_count(const struct PbModel *model);

/**
 * Serialize to JSON. Release the string with [`pb_string_free`]. Returns
 * null for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
char *pb_model_to_json(const struct PbModel *model);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum PbStatus pb_model_from_json(const char *json, struct PbModel **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum PbStatus pb_model_save(const struct PbModel *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum PbStatus pb_model_load(const char *path, struct PbModel **out);

/**
 * # Safety
 * `model` must be null or a handle not freed before.
 */
void pb_model_free(struct PbModel *model);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not freed before.
 */
void pb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATHBOOST_H */
