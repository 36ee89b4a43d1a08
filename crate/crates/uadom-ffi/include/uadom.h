#ifndef UADOM_H
#define UADOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum UadomStatus {
  UADOM_STATUS_OK = 0,
  UADOM_STATUS_NULL_POINTER = 1,
  UADOM_STATUS_INVALID_UTF8 = 2,
  UADOM_STATUS_PARSE_ERROR = 3,
  UADOM_STATUS_INVALID_ARGUMENT = 4,
  UADOM_STATUS_BUDGET_EXCEEDED = 5,
} UadomStatus;

/**
 * An algebra with its optional designated subalgebra.
 */
typedef struct UadomAlgebra UadomAlgebra;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *uadom_last_error_message(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `uadom_*` function and
 * not yet freed.
 */
void uadom_string_free(char *s);

/**
 * Parses the algebra file format. On success `*out` owns the handle;
 * release it with `uadom_algebra_free`.
 *
 * # Safety
 * `text` must point to a NUL-terminated string; `out` must be valid.
 */
enum UadomStatus uadom_algebra_parse(const char *text, struct UadomAlgebra **out);

/**
 * # Safety
 * `h` must come from `uadom_algebra_parse` and not be freed twice.
 */
void uadom_algebra_free(struct UadomAlgebra *h);

/**
 * Carrier size of the algebra, or 0 for a NULL handle.
 *
 * # Safety
 * `h` must be a live handle or NULL.
 */
uintptr_t uadom_algebra_size(const struct UadomAlgebra *h);

/**
 * Congruence-closure proof of equality of two tagged terms in A⨿_B A,
 * at the given identity-instantiation depth. JSON: verdict + statistics.
 *
 * # Safety
 * All pointers must be valid; `h` must be a live handle.
 */
enum UadomStatus uadom_coprod_prove(const struct UadomAlgebra *h,
                                    const char *identities_text,
                                    uintptr_t depth,
                                    const char *left,
                                    const char *right,
                                    char **out);

/**
 * Brute-force dominion over-approximation. JSON: members plus the indices
 * of separated elements.
 *
 * # Safety
 * All pointers must be valid; `h` must be a live handle.
 */
enum UadomStatus uadom_dominion_upper(const struct UadomAlgebra *h,
                                      const char *identities_text,
                                      uintptr_t max_c,
                                      char **out);

/**
 * The ∏-criterion on the witness model: bit i of `subset_mask` is variable
 * i+1. Writes 1 or 0 through `out`.
 *
 * # Safety
 * `out` must be valid.
 */
enum UadomStatus uadom_model_transferable(uintptr_t n,
                                          uintptr_t m,
                                          uint32_t subset_mask,
                                          int32_t *out);

/**
 * BFS divisor-transfer equivalence of (u,v) and (u2,v2); each array holds
 * `n` exponents. Writes 1 or 0 through `out`.
 *
 * # Safety
 * The four arrays must hold `n` readable u32 values; `out` must be valid.
 */
enum UadomStatus uadom_model_pair_equivalent(uintptr_t n,
                                             uintptr_t m,
                                             const uint32_t *u,
                                             const uint32_t *v,
                                             const uint32_t *u2,
                                             const uint32_t *v2,
                                             int32_t *out);

/**
 * Transfer-system decision for a collection file over comma-separated
 * labels. JSON: verdict, witness when negative.
 *
 * # Safety
 * All pointers must be valid NUL-terminated strings.
 */
enum UadomStatus uadom_tsys_decide(const char *labels_csv, const char *collection_text, char **out);

/**
 * The dominion witness for the principal system T(V); `v_mask` has bit i
 * for ground element i+1. JSON: instance data and the collection.
 *
 * # Safety
 * `out` must be valid.
 */
enum UadomStatus uadom_tsys_witness(uintptr_t n, uint32_t v_mask, char **out);

/**
 * Certify through a shared-variable array; block values come as arrays.
 * Validity of the array identity is recorded as an assumption. JSON: the
 * full certificate.
 *
 * # Safety
 * Pointers must be valid; the three arrays must hold the stated lengths.
 */
enum UadomStatus uadom_certify_shared(const struct UadomAlgebra *h,
                                      const char *array_text,
                                      const uintptr_t *x1,
                                      uintptr_t x1_len,
                                      const uintptr_t *x2,
                                      uintptr_t x2_len,
                                      const uintptr_t *y,
                                      uintptr_t y_len,
                                      char **out);

/**
 * Replay a certificate (JSON text) and search for separating pairs into
 * the handle's algebra. JSON: verdict.
 *
 * # Safety
 * Pointers must be valid; `codomain` must be a live handle.
 */
enum UadomStatus uadom_verify_certificate(const char *cert_json,
                                          const struct UadomAlgebra *codomain,
                                          uintptr_t max_c,
                                          char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* UADOM_H */
