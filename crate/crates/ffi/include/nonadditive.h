#ifndef NONADDITIVE_H
#define NONADDITIVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NaStatus {
  NA_STATUS_OK = 0,
  NA_STATUS_NULL_POINTER = 1,
  NA_STATUS_INVALID_UTF8 = 2,
  NA_STATUS_PARSE = 3,
  NA_STATUS_INVALID = 4,
  NA_STATUS_MISMATCH = 5,
  NA_STATUS_INTERNAL = 6,
} NaStatus;

typedef struct NaCapacity NaCapacity;

typedef struct NaFunction NaFunction;

typedef struct NaMeasure NaMeasure;

typedef struct NaPartition NaPartition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *na_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void na_string_free(char *s);

// Parses a capacity handle from its JSON encoding.
//
// # Safety
// `json_text` must be a valid C string and `out` writable.
enum NaStatus na_capacity_from_json(const char *json_text, struct NaCapacity **out);

// Releases a capacity handle. Null is ignored.
//
// # Safety
// `h` must come from this library and not be freed twice.
void na_capacity_free(struct NaCapacity *h);

// Parses a measure handle from its JSON encoding.
//
// # Safety
// `json_text` must be a valid C string and `out` writable.
enum NaStatus na_measure_from_json(const char *json_text, struct NaMeasure **out);

// Releases a measure handle. Null is ignored.
//
// # Safety
// `h` must come from this library and not be freed twice.
void na_measure_free(struct NaMeasure *h);

// Parses a partition handle from its JSON encoding.
//
// # Safety
// `json_text` must be a valid C string and `out` writable.
enum NaStatus na_partition_from_json(const char *json_text, struct NaPartition **out);

// Releases a partition handle. Null is ignored.
//
// # Safety
// `h` must come from this library and not be freed twice.
void na_partition_free(struct NaPartition *h);

// Parses a function handle from its JSON encoding.
//
// # Safety
// `json_text` must be a valid C string and `out` writable.
enum NaStatus na_function_from_json(const char *json_text, struct NaFunction **out);

// Releases a function handle. Null is ignored.
//
// # Safety
// `h` must come from this library and not be freed twice.
void na_function_free(struct NaFunction *h);

// Capacity JSON for a handle.
//
// # Safety
// `v` must be a live handle and `out` writable.
enum NaStatus na_capacity_to_json(const struct NaCapacity *v, char **out);

// `v(F)` for the subset with bitmask `mask`, as `"p/q"`.
//
// # Safety
// `v` must be a live handle and `out` writable.
enum NaStatus na_capacity_value(const struct NaCapacity *v, uint64_t mask, char **out);

// Choquet integral of `f` with respect to `v`, as `"p/q"`.
//
// # Safety
// Handles must be live and `out` writable.
enum NaStatus na_choquet(const struct NaCapacity *v, const struct NaFunction *f, char **out);

// Concave integral of `f` with respect to `v`, as `"p/q"`.
//
// # Safety
// Handles must be live and `out` writable.
enum NaStatus na_concave(const struct NaCapacity *v, const struct NaFunction *f, char **out);

// `Σ_blocks (min_block f) P(block)`, as `"p/q"`.
//
// # Safety
// Handles must be live and `out` writable.
enum NaStatus na_psa(const struct NaMeasure *p,
                     const struct NaPartition *partition,
                     const struct NaFunction *f,
                     char **out);

// The totally balanced cover of `v` as a new handle.
//
// # Safety
// `v` must be a live handle and `out` writable.
enum NaStatus na_balanced_cover(const struct NaCapacity *v, struct NaCapacity **out);

// The capacity induced by `p` on the algebra generated by `partition`.
//
// # Safety
// Handles must be live and `out` writable.
enum NaStatus na_induce(const struct NaMeasure *p,
                        const struct NaPartition *partition,
                        struct NaCapacity **out);

// Convexity verdict. When `witness_json` is non-null it receives the violating pair as JSON,
// or null when convex.
//
// # Safety
// `v` must be a live handle and `holds` writable.
enum NaStatus na_check_convex(const struct NaCapacity *v, bool *holds, char **witness_json);

// Null-additivity verdict, with the same witness convention as [`na_check_convex`].
//
// # Safety
// `v` must be a live handle and `holds` writable.
enum NaStatus na_check_null_additive(const struct NaCapacity *v, bool *holds, char **witness_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONADDITIVE_H */
