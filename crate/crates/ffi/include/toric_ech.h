#ifndef TORIC_ECH_H
#define TORIC_ECH_H

#pragma once

#include <stdbool.h>
#include <stdint.h>

typedef enum EchStatus {
  ECH_STATUS_OK = 0,
  ECH_STATUS_NULL_POINTER = 1,
  ECH_STATUS_INVALID_UTF8 = 2,
  ECH_STATUS_PARSE = 3,
  ECH_STATUS_INVALID_DOMAIN = 4,
  ECH_STATUS_RESOURCE_LIMIT = 5,
  ECH_STATUS_NOT_REPRESENTABLE = 6,
  ECH_STATUS_IO = 7,
  ECH_STATUS_PANIC = 8,
} EchStatus;

// Opaque domain handle.
typedef struct EchDomain EchDomain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse a JSON domain description into a new handle.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum EchStatus ech_domain_from_json(const char *json, struct EchDomain **out);

// Release a handle. Null is ignored.
//
// # Safety
// `d` must come from this library and not be used afterwards.
void ech_domain_free(struct EchDomain *d);

// Multiply a domain by `factor` (a positive rational string) into a new handle.
//
// # Safety
// `d` must be a live handle, `factor` a NUL-terminated string, `out` writable.
enum EchStatus ech_domain_scale(const struct EchDomain *d,
                                const char *factor,
                                struct EchDomain **out);

// Moment-plane area as "p/q".
//
// # Safety
// `d` must be a live handle and `out` writable.
enum EchStatus ech_domain_area(const struct EchDomain *d, char **out);

// Weight multiset as JSON: an array of ["weight", "multiplicity"] pairs.
//
// # Safety
// `d` must be a live handle and `out` writable.
enum EchStatus ech_domain_weights_json(const struct EchDomain *d, char **out);

// The k-th capacity. `lower` and `upper` receive "p/q" strings and `exact`
// is set when they agree. Any of the three outputs may be null.
//
// # Safety
// `d` must be a live handle; non-null outputs must be writable.
enum EchStatus ech_domain_capacity(const struct EchDomain *d,
                                   uint64_t k,
                                   char **lower,
                                   char **upper,
                                   bool *exact);

// Smallest t with u inside t·v, compared through moment profiles, as "p/q".
//
// # Safety
// `u`, `v` must be live handles and `out` writable.
enum EchStatus ech_inclusion_scale(const struct EchDomain *u,
                                   const struct EchDomain *v,
                                   char **out);

// Lower and upper bounds on the log distance of two domains, using capacity
// indices up to `kmax`. `upper` is set to a negative value when no upper
// bound is available.
//
// # Safety
// `u`, `v` must be live handles and `lower`, `upper` writable.
enum EchStatus ech_distance_bounds(const struct EchDomain *u,
                                   const struct EchDomain *v,
                                   uint64_t kmax,
                                   double *lower,
                                   double *upper);

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *ech_last_error(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void ech_string_free(char *s);

// Library version as a static string.
const char *ech_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORIC_ECH_H */
