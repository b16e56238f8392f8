#ifndef CONSISTENT_KCENTER_H
#define CONSISTENT_KCENTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CkcStatus {
  CKC_STATUS_OK = 0,
  CKC_STATUS_NULL_POINTER = 1,
  CKC_STATUS_INVALID_ARGUMENT = 2,
  CKC_STATUS_UNKNOWN_POINT = 3,
  CKC_STATUS_STATE_ERROR = 4,
  CKC_STATUS_INPUT_ERROR = 5,
  CKC_STATUS_INTERNAL = 6,
} CkcStatus;

// Opaque clusterer handle.
typedef struct CkcClusterer CkcClusterer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a clusterer over Euclidean space of dimension `dim`, with
// pairwise distances bounded by `delta`, maintaining `k` centers.
//
// # Safety
// `out` must be NULL or point to writable storage for one handle.
enum CkcStatus ckc_clusterer_new_euclidean(size_t dim,
                                           uint64_t delta,
                                           size_t k,
                                           struct CkcClusterer **out);

// # Safety
// `c` must be NULL or a handle from [`ckc_clusterer_new_euclidean`] that
// has not been freed.
void ckc_clusterer_free(struct CkcClusterer *c);

// Insert point `id`. `coords` holds `len` values; pass NULL and 0 to
// re-insert a point whose coordinates are already known. The number of
// center swaps is written to `swaps_out` unless it is NULL.
//
// # Safety
// `c` must be a live handle, `id` a NUL-terminated string, `coords` NULL
// or valid for `len` reads, `swaps_out` NULL or writable.
enum CkcStatus ckc_clusterer_insert(struct CkcClusterer *c,
                                    const char *id,
                                    const double *coords,
                                    size_t len,
                                    size_t *swaps_out);

// Delete active point `id`.
//
// # Safety
// As for [`ckc_clusterer_insert`].
enum CkcStatus ckc_clusterer_delete(struct CkcClusterer *c, const char *id, size_t *swaps_out);

// Number of active points.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum CkcStatus ckc_clusterer_len(struct CkcClusterer *c, size_t *out);

// Largest distance from an active point to its nearest center.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum CkcStatus ckc_clusterer_cost(struct CkcClusterer *c, double *out);

// Current centers as a JSON array of ids sorted by label. Release the
// string with [`ckc_string_free`].
//
// # Safety
// `c` must be a live handle and `out` writable.
enum CkcStatus ckc_clusterer_centers_json(struct CkcClusterer *c, char **out);

// # Safety
// `s` must be NULL or a string returned by this library, freed once.
void ckc_string_free(char *s);

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *ckc_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONSISTENT_KCENTER_H */
