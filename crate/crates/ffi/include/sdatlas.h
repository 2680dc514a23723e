#ifndef SDATLAS_H
#define SDATLAS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_ARGUMENT = 1,
  SD_STATUS_INVALID_UTF8 = 2,
  SD_STATUS_PARSE_ERROR = 3,
  SD_STATUS_ANALYSIS_ERROR = 4,
  SD_STATUS_CATALOG_ERROR = 5,
  SD_STATUS_INVALID_QUERY = 6,
  SD_STATUS_SERIALIZE_ERROR = 7,
  SD_STATUS_PANIC = 8,
} SdStatus;

/**
 * A loaded, read-only catalog snapshot.
 */
typedef struct SdCatalog SdCatalog;

/**
 * A parsed system model.
 */
typedef struct SdModel SdModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated library version.
 */
const char *sdatlas_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next sdatlas call on the same thread.
 */
const char *sdatlas_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void sdatlas_string_free(char *s);

/**
 * Parses an XMILE document of `len` bytes.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum SdStatus sdatlas_model_parse_xmile(const uint8_t *data, size_t len, struct SdModel **out);

/**
 * Releases a model handle. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`sdatlas_model_parse_xmile`] and not be used again.
 */
void sdatlas_model_free(struct SdModel *model);

/**
 * Number of variables in the model, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t sdatlas_model_variable_count(const struct SdModel *model);

/**
 * Parse and validation diagnostics as a JSON array.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SdStatus sdatlas_model_diagnostics_json(const struct SdModel *model, char **out);

/**
 * Writes the model back out as XMILE.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SdStatus sdatlas_model_serialize_xmile(const struct SdModel *model, char **out);

/**
 * Feedback loops as `{"loops": [...], "truncated": bool}`. A negative
 * `max_length` enumerates every loop.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SdStatus sdatlas_model_loops_json(const struct SdModel *model, int64_t max_length, char **out);

/**
 * Causal diagram with named loops as structured JSON.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SdStatus sdatlas_model_structured_json(const struct SdModel *model, char **out);

/**
 * Plain-text description of the causal diagram.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SdStatus sdatlas_model_narrative(const struct SdModel *model, char **out);

/**
 * Node positions in the unit square as JSON, deterministic in `seed`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SdStatus sdatlas_model_layout_json(const struct SdModel *model, uint64_t seed, char **out);

/**
 * Loads a catalog snapshot directory.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` writable.
 */
enum SdStatus sdatlas_catalog_load(const char *dir, struct SdCatalog **out);

/**
 * Releases a catalog handle. NULL is ignored.
 *
 * # Safety
 * `catalog` must come from [`sdatlas_catalog_load`] and not be used again.
 */
void sdatlas_catalog_free(struct SdCatalog *catalog);

/**
 * Number of documents, or 0 for NULL.
 *
 * # Safety
 * `catalog` must be NULL or a live handle.
 */
size_t sdatlas_catalog_len(const struct SdCatalog *catalog);

/**
 * Runs a search. `query_json` carries the same fields as the HTTP search
 * body; the result is a JSON array of hits.
 *
 * # Safety
 * `catalog` must be a live handle, `query_json` NUL-terminated, `out` writable.
 */
enum SdStatus sdatlas_catalog_search_json(const struct SdCatalog *catalog,
                                          const char *query_json,
                                          char **out);

/**
 * Document as JSON, or NULL in `out` when the id is unknown.
 *
 * # Safety
 * `catalog` must be a live handle, `id` NUL-terminated, `out` writable.
 */
enum SdStatus sdatlas_catalog_document_json(const struct SdCatalog *catalog,
                                            const char *id,
                                            char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDATLAS_H */
