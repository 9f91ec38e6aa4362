#ifndef LIFT5_H
#define LIFT5_H

#include <stddef.h>

#if defined(LIFT5_BUILDING)
#define LIFT5_API __attribute__((visibility("default")))
#else
#define LIFT5_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lift5_status {
  LIFT5_OK = 0,
  LIFT5_ERR_INVALID_ARGUMENT = 1,
  LIFT5_ERR_RANGE = 2,
  LIFT5_ERR_FORMAT = 3,
  LIFT5_ERR_TRUNCATED = 4,
  LIFT5_ERR_GRID_MISMATCH = 5,
  LIFT5_ERR_IO = 6,
  LIFT5_ERR_NUMERIC = 7,
  LIFT5_ERR_REGIME = 8,
  LIFT5_ERR_RESOLUTION = 9,
  LIFT5_ERR_UNSUPPORTED_GRID = 10,
  LIFT5_ERR_SCHEMA = 11,
  LIFT5_ERR_INTERNAL = 12
} lift5_status;

/* Grid, time stamp and named (r, z) fields, as stored in a SWRL1 file. */
typedef struct lift5_bundle lift5_bundle;

LIFT5_API const char* lift5_version(void);
LIFT5_API int lift5_schema_version(void);
LIFT5_API const char* lift5_status_name(lift5_status s);
/* Message of the last failing call on this thread; "" after a success. */
LIFT5_API const char* lift5_last_error(void);
/* Strings returned through char** outputs are owned by the caller. */
LIFT5_API void lift5_string_free(char* s);
/* 0 selects the hardware concurrency. */
LIFT5_API lift5_status lift5_set_threads(int n);

LIFT5_API lift5_status lift5_bundle_read(const char* path, lift5_bundle** out);
LIFT5_API lift5_status lift5_bundle_write(const lift5_bundle* b, const char* path);
LIFT5_API void lift5_bundle_free(lift5_bundle* b);
/* {"nr", "nz", "R_max", "L_z", "time", "fields": [...]} */
LIFT5_API lift5_status lift5_bundle_info(const lift5_bundle* b, char** json);
/* Copies nr * nz values, r-major. */
LIFT5_API lift5_status lift5_bundle_field(const lift5_bundle* b, const char* name, double* out, size_t count);

/* Every params argument is a JSON object; NULL or "" means all defaults.
 * Unknown keys and out-of-range values fail with LIFT5_ERR_INVALID_ARGUMENT
 * or LIFT5_ERR_RANGE before any computation.  Reports follow the shared
 * schema {tool, version, schema_version, run_id, command, inputs, checks, data}. */

/* recipe, nr, nz, R_max, L_z, seed, amplitude, ratio, shells, mass */
LIFT5_API lift5_status lift5_gen(const char* params, lift5_bundle** out);

/* config_text: key = value solver config (may be NULL); params: overrides with
 * the same keys.  A truncated run still returns its report and yields
 * LIFT5_ERR_NUMERIC. */
LIFT5_API lift5_status lift5_evolve(const char* config_text, const char* params, char** report);

/* lambda, z0, field: one axis-ball score plus delta over k_lo..k_hi. */
LIFT5_API lift5_status lift5_score(const lift5_bundle* b, const char* params, char** report);
/* lambda_min, lambda_max, stride_factor, ratio, field; csv receives the score matrix (may be NULL). */
LIFT5_API lift5_status lift5_scan(const lift5_bundle* b, const char* params, char** report, char** csv);

/* eta, C0, aspect_max, mass_fraction, level, k, N0, field */
LIFT5_API lift5_status lift5_classify(const lift5_bundle* b, const char* params, char** report);

/* k_min, k_max, range_lo, range_hi, N0, C, calibration_fields, seed, field.
 * Without C the constant is fitted on diffuse calibration fields on the same grid.
 * *pass receives the audit result (may be NULL). */
LIFT5_API lift5_status lift5_paraproduct(const lift5_bundle* b, const char* params, char** report, char** csv,
                                         int* pass);

/* k_shift, partition_gain, seed, only, and sample sizes.  *required_pass
 * receives 1 iff every pass-required check passed; table receives the
 * human-readable summary (may be NULL). */
LIFT5_API lift5_status lift5_lemmas(const char* params, char** report, char** table, int* required_pass);

/* Merges reports; csv receives a JSON object mapping file names to CSV text. */
LIFT5_API lift5_status lift5_report(const char* const* documents, size_t count, char** bundle, char** csv);

#ifdef __cplusplus
}
#endif

#endif
