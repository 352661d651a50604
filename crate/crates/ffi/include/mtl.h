#ifndef MTL_H
#define MTL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MTL_KIND_PHI 0

#define MTL_KIND_TILDE3 1

#define MTL_KIND_TILDE2 2

/**
 * Result code of every fallible call.
 */
typedef enum MtlStatus {
  MTL_STATUS_OK = 0,
  MTL_STATUS_NULL_POINTER = 1,
  MTL_STATUS_INVALID_ARGUMENT = 2,
  MTL_STATUS_DIMENSION_MISMATCH = 3,
  MTL_STATUS_DEGENERATE = 4,
  MTL_STATUS_INVALID_INDICES = 5,
  MTL_STATUS_PARSE = 6,
  MTL_STATUS_NUMERICAL_FAILURE = 7,
  MTL_STATUS_PANIC = 8,
} MtlStatus;

/**
 * Opaque support patch.
 */
typedef struct MtlPatch MtlPatch;

/**
 * Opaque convex polytope.
 */
typedef struct MtlPolytope MtlPolytope;

/**
 * Opaque symmetric tensor.
 */
typedef struct MtlTensor MtlTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on this thread.
 */
const char *mtl_last_error(void);

/**
 * Frees a string returned by the library.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void mtl_string_free(char *s);

/**
 * Convex hull of `count` points of dimension `dim`, stored row by row.
 *
 * # Safety
 * `coords` must point to `count * dim` doubles and `out` to writable storage.
 */
enum MtlStatus mtl_polytope_new(size_t dim,
                                const double *coords,
                                size_t count,
                                struct MtlPolytope **out);

/**
 * # Safety
 * `p` must be null or a handle from [`mtl_polytope_new`].
 */
void mtl_polytope_free(struct MtlPolytope *p);

/**
 * Ambient dimension, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live polytope handle.
 */
size_t mtl_polytope_ambient_dim(const struct MtlPolytope *p);

/**
 * Dimension of the affine hull, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live polytope handle.
 */
size_t mtl_polytope_intrinsic_dim(const struct MtlPolytope *p);

/**
 * Number of faces of dimension `k`.
 *
 * # Safety
 * `p` must be null or a live polytope handle.
 */
size_t mtl_polytope_face_count(const struct MtlPolytope *p, size_t k);

/**
 * The patch covering all of `R^n x S^{n-1}`.
 *
 * # Safety
 * `out` must point to writable storage.
 */
enum MtlStatus mtl_patch_all(struct MtlPatch **out);

/**
 * Patch from its JSON file form (`{"patches": [...]}`).
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum MtlStatus mtl_patch_from_json(const char *json, struct MtlPatch **out);

/**
 * # Safety
 * `p` must be null or a patch handle.
 */
void mtl_patch_free(struct MtlPatch *p);

/**
 * Evaluates the basis valuation `Q^m val^{r,s,j}_k` of the given kind.
 * `k` is ignored for tilde3 and `j` for tilde2.
 *
 * # Safety
 * `poly` and `patch` must be live handles and `out` writable.
 */
enum MtlStatus mtl_valuation_evaluate(const struct MtlPolytope *poly,
                                      const struct MtlPatch *patch,
                                      uint32_t kind,
                                      size_t k,
                                      size_t m,
                                      size_t r,
                                      size_t s,
                                      size_t j,
                                      struct MtlTensor **out);

/**
 * # Safety
 * `t` must be null or a tensor handle.
 */
void mtl_tensor_free(struct MtlTensor *t);

/**
 * # Safety
 * `t` must be null or a live tensor handle.
 */
size_t mtl_tensor_dim(const struct MtlTensor *t);

/**
 * # Safety
 * `t` must be null or a live tensor handle.
 */
size_t mtl_tensor_rank(const struct MtlTensor *t);

/**
 * `T(x_1, ..., x_p)` with the `p = rank` vectors stored row by row in
 * `args` (`rank * dim` doubles).
 *
 * # Safety
 * `t` must be a live handle, `args` readable as described, `out` writable.
 */
enum MtlStatus mtl_tensor_evaluate(const struct MtlTensor *t, const double *args, double *out);

/**
 * JSON form `{"n", "rank", "coeffs"}` of the tensor; free with
 * [`mtl_string_free`].
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum MtlStatus mtl_tensor_to_json(const struct MtlTensor *t, char **out);

/**
 * Number of basis valuations of rank `p` in dimension `n`.
 */
size_t mtl_basis_count(size_t n, size_t p);

/**
 * Numeric rank of the basis on a seeded sample, and the size of the basis.
 *
 * # Safety
 * `rank` and `expected` must be writable.
 */
enum MtlStatus mtl_independence_rank(size_t n,
                                     size_t p,
                                     uint64_t seed,
                                     size_t *rank,
                                     size_t *expected);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MTL_H */
