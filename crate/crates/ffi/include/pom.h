#ifndef POM_H
#define POM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PomStatus {
  POM_STATUS_OK = 0,
  POM_STATUS_NULL_POINTER = 1,
  POM_STATUS_INVALID_ARGUMENT = 2,
  POM_STATUS_INVALID_UTF8 = 3,
  POM_STATUS_PARSE = 4,
  POM_STATUS_NUMERICAL = 5,
  POM_STATUS_IO = 6,
  POM_STATUS_PANIC = 7,
} PomStatus;

// Opaque measurement setup.
typedef struct PomSetup PomSetup;

typedef struct PomSos {
  double residual;
  double gamma_min_eig;
} PomSos;

typedef struct PomSimulation {
  uint64_t rounds;
  uint64_t successes;
  double estimate;
  double standard_error;
} PomSimulation;

typedef struct PomBounds {
  double classical;
  double pnc;
  double quantum_opt;
  double algebraic_success;
} PomBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Canonical setup for `n` bits (2 to 12).
//
// # Safety
// `out` must be valid for writes. The handle is released with [`pom_setup_free`].
enum PomStatus pom_setup_canonical(uint32_t n, struct PomSetup **out);

// Parses a setup document.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be valid for writes.
enum PomStatus pom_setup_from_json(const char *json, struct PomSetup **out);

// Serializes a setup; free the string with [`pom_string_free`].
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_setup_to_json(const struct PomSetup *setup, char **out);

// Number of bits the setup plays.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_setup_n(const struct PomSetup *setup, uint32_t *out);

// Releases a handle. Null is ignored.
//
// # Safety
// `setup` must come from this library and not be used afterwards.
void pom_setup_free(struct PomSetup *setup);

// Expectation of the Bell operator in the setup's state.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_bell_value(const struct PomSetup *setup, double *out);

// Largest eigenvalue of the setup's Bell operator.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_spectral_max(const struct PomSetup *setup, double *out);

// Success probability from the steered ensemble and Bob's measurements.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_success_direct(const struct PomSetup *setup, double *out);

// Success probability from the Bell value.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_success_via_bell(const struct PomSetup *setup, double *out);

// Sum-of-squares residual and smallest eigenvalue of the shifted operator.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_sos_certificate(const struct PomSetup *setup, struct PomSos *out);

// Largest parity deviation of the steered ensemble.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_parity_deviation(const struct PomSetup *setup, double *out);

// Seeded Monte Carlo run over `shards` independent streams.
//
// # Safety
// `setup` must be a live handle or null; `out` must be valid for writes.
enum PomStatus pom_simulate(const struct PomSetup *setup,
                            uint64_t rounds,
                            uint64_t seed,
                            uint32_t shards,
                            struct PomSimulation *out);

// Closed-form success bounds for `n` bits.
//
// # Safety
// `out` must be valid for writes.
enum PomStatus pom_bounds(uint32_t n, struct PomBounds *out);

// Local-hidden-variable maximum of the Bell expression.
//
// # Safety
// `out` must be valid for writes.
enum PomStatus pom_lhv_max(uint32_t n, int64_t *out);

// Optimal parity-oblivious classical success with an `alphabet`-message channel.
//
// # Safety
// `out` must be valid for writes.
enum PomStatus pom_classical_lp(uint32_t n, uint32_t alphabet, double *out);

// Best see-saw objective over `restarts` starts; `dim = 0` picks the default.
//
// # Safety
// `out` must be valid for writes.
enum PomStatus pom_seesaw(uint32_t n, uint32_t dim, uint32_t restarts, uint64_t seed, double *out);

// Message for the last failed call on this thread, or null. Valid until
// the next library call on this thread.
const char *pom_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void pom_string_free(char *s);

// Library version as a static nul-terminated string.
const char *pom_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POM_H */
