#ifndef PDR_RADAR_H
#define PDR_RADAR_H

/* Generated by cbindgen from pdr-radar-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum PdrStatus {
  PDR_STATUS_OK = 0,
  PDR_STATUS_NULL_ARGUMENT = 1,
  PDR_STATUS_INVALID_ARGUMENT = 2,
  PDR_STATUS_SOLVER_FAILURE = 3,
  PDR_STATUS_BUFFER_TOO_SMALL = 4,
} PdrStatus;

/**
 * A finished design run: waveform, metrics and iteration counts.
 */
typedef struct PdrDesign PdrDesign;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the most recent error on this thread; valid until the
 * next failing call from the same thread.
 */
const char *pdr_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *pdr_version(void);

/**
 * Runs the full alternating design described by a JSON run configuration
 * (the same schema the CLI consumes; `output_dir` is ignored, nothing is
 * written to disk). On success `*out` owns the result and must be released
 * with [`pdr_design_free`].
 *
 * # Safety
 * `config_json` must be a valid nul-terminated string and `out` a valid
 * pointer.
 */
enum PdrStatus pdr_design_run(const char *config_json, struct PdrDesign **out);

/**
 * Number of complex samples in the designed waveform.
 *
 * # Safety
 * `design` must be a live handle from [`pdr_design_run`].
 */
uintptr_t pdr_design_code_len(const struct PdrDesign *design);

/**
 * Copies the designed waveform into caller buffers of length `len`
 * (antenna-major sample order).
 *
 * # Safety
 * `design` must be a live handle; `re` and `im` must point to `len`
 * writable doubles.
 */
enum PdrStatus pdr_design_waveform(const struct PdrDesign *design,
                                   double *re,
                                   double *im,
                                   uintptr_t len);

/**
 * Deviation of the design from its scenario, in dB.
 *
 * # Safety
 * `design` must be a live handle.
 */
double pdr_design_deviation_db(const struct PdrDesign *design);

/**
 * Lag-zero integrated sidelobe level of the design, in dB.
 *
 * # Safety
 * `design` must be a live handle.
 */
double pdr_design_isl0_db(const struct PdrDesign *design);

/**
 * Outer passes executed by the design loop.
 *
 * # Safety
 * `design` must be a live handle.
 */
uintptr_t pdr_design_outer_passes(const struct PdrDesign *design);

/**
 * Total inner descent steps summed over all outer passes.
 *
 * # Safety
 * `design` must be a live handle.
 */
uintptr_t pdr_design_inner_iterations(const struct PdrDesign *design);

/**
 * Releases a design handle. Passing null is a no-op.
 *
 * # Safety
 * `design` must be null or a handle from [`pdr_design_run`] not yet freed.
 */
void pdr_design_free(struct PdrDesign *design);

/**
 * Evaluates an arbitrary complex code (split re/im, antenna-major) against
 * the scenario in the JSON config: deviation and ISL0 in dB.
 *
 * # Safety
 * `config_json` must be nul-terminated; `re`/`im` must hold `len` doubles;
 * the out pointers must be valid.
 */
enum PdrStatus pdr_evaluate_code(const char *config_json,
                                 const double *re,
                                 const double *im,
                                 uintptr_t len,
                                 double *out_deviation_db,
                                 double *out_isl0_db);

/**
 * Fills caller buffers with the LFM reference set (exactly orthogonal,
 * unit modulus), antenna-major.
 *
 * # Safety
 * `re` and `im` must hold `antennas*samples` doubles.
 */
enum PdrStatus pdr_lfm_set(uintptr_t antennas,
                           uintptr_t samples,
                           double *re,
                           double *im,
                           uintptr_t len);

/**
 * ISL0 (dB) of a code given as split re/im buffers, antenna-major.
 *
 * # Safety
 * `re`/`im` must hold `antennas*samples` doubles; `out_db` must be valid.
 */
enum PdrStatus pdr_isl0_db(const double *re,
                           const double *im,
                           uintptr_t antennas,
                           uintptr_t samples,
                           double *out_db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDR_RADAR_H */
