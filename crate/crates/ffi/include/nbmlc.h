#ifndef NBMLC_H
#define NBMLC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NbmlcStatus {
  NBMLC_STATUS_OK = 0,
  NBMLC_STATUS_NULL_POINTER = 1,
  NBMLC_STATUS_INVALID_ARGUMENT = 2,
  NBMLC_STATUS_INVALID_FIELD = 3,
  NBMLC_STATUS_ZERO_INVERSE = 4,
  NBMLC_STATUS_DEGENERATE_MESSAGE = 5,
  NBMLC_STATUS_INFEASIBLE_PROFILE = 6,
  NBMLC_STATUS_LENGTH_MISMATCH = 7,
  NBMLC_STATUS_SYMBOL_OUT_OF_RANGE = 8,
  NBMLC_STATUS_ALIST_PARSE = 9,
  NBMLC_STATUS_UNKNOWN_PRESET = 10,
  NBMLC_STATUS_INVALID_SCHEME = 11,
  NBMLC_STATUS_IO = 12,
  NBMLC_STATUS_INVALID_UTF8 = 13,
  NBMLC_STATUS_PANIC = 14,
} NbmlcStatus;

/**
 * LDPC code with its encoder and a decoder workspace.
 */
typedef struct NbmlcCode NbmlcCode;

/**
 * Finite field GF(2^m).
 */
typedef struct NbmlcField NbmlcField;

/**
 * Coded modulation scheme.
 */
typedef struct NbmlcScheme NbmlcScheme;

/**
 * Result of one simulated Eb/N0 point.
 */
typedef struct NbmlcSimPoint {
  uint64_t trials;
  uint64_t block_errors;
  uint64_t bit_errors;
  uint64_t bits;
  double avg_iterations;
} NbmlcSimPoint;

/**
 * Per-iteration decoding cost.
 */
typedef struct NbmlcComplexity {
  uint64_t gf_mul;
  uint64_t float_add;
  uint64_t float_mul;
  uint64_t memory;
} NbmlcComplexity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *nbmlc_last_error(void);

/**
 * GF(2^m) for `m` in 1..=8; `poly` 0 selects the default primitive
 * polynomial.
 */
enum NbmlcStatus nbmlc_field_new(uint32_t m, uint32_t poly, struct NbmlcField **out);

void nbmlc_field_free(struct NbmlcField *field);

uint32_t nbmlc_field_order(const struct NbmlcField *field);

enum NbmlcStatus nbmlc_field_mul(const struct NbmlcField *field,
                                 uint8_t a,
                                 uint8_t b,
                                 uint8_t *out);

enum NbmlcStatus nbmlc_field_inv(const struct NbmlcField *field, uint8_t a, uint8_t *out);

/**
 * Column-regular PEG code over GF(2^m) (default polynomial) with `n`
 * columns, `checks` rows and column weight `column_weight`.
 */
enum NbmlcStatus nbmlc_code_peg(uint32_t m,
                                size_t n,
                                size_t checks,
                                size_t column_weight,
                                uint64_t seed,
                                struct NbmlcCode **out);

enum NbmlcStatus nbmlc_code_load(const char *path, struct NbmlcCode **out);

enum NbmlcStatus nbmlc_code_save(const struct NbmlcCode *code, const char *path);

void nbmlc_code_free(struct NbmlcCode *code);

/**
 * Length `n`, rows `m`, dimension `k` and field order `q`; any output may
 * be null.
 */
enum NbmlcStatus nbmlc_code_dims(const struct NbmlcCode *code,
                                 size_t *n,
                                 size_t *m,
                                 size_t *k,
                                 size_t *q);

/**
 * Systematic encoding of `k` symbols into `n`.
 */
enum NbmlcStatus nbmlc_code_encode(const struct NbmlcCode *code,
                                   const uint8_t *info,
                                   size_t info_len,
                                   uint8_t *word,
                                   size_t word_len);

enum NbmlcStatus nbmlc_code_syndrome(const struct NbmlcCode *code,
                                     const uint8_t *word,
                                     size_t word_len,
                                     uint8_t *syndrome,
                                     size_t syndrome_len);

/**
 * FFT-QSPA decoding of `n` symbol priors laid out as `n * q` weights.
 * Writes the decided word; `iterations` and `converged` may be null.
 */
enum NbmlcStatus nbmlc_code_decode(struct NbmlcCode *code,
                                   const double *priors,
                                   size_t priors_len,
                                   uint32_t max_iterations,
                                   uint8_t *word,
                                   size_t word_len,
                                   uint32_t *iterations,
                                   bool *converged);

/**
 * Builds a named preset by PEG; `block_symbols` 0 keeps the full length.
 */
enum NbmlcStatus nbmlc_scheme_preset(const char *name,
                                     size_t block_symbols,
                                     uint64_t seed,
                                     struct NbmlcScheme **out);

void nbmlc_scheme_free(struct NbmlcScheme *scheme);

/**
 * Information bits per block; 0 for a null handle.
 */
size_t nbmlc_scheme_info_bits(const struct NbmlcScheme *scheme);

/**
 * Information bits per coded bit; 0 for a null handle.
 */
double nbmlc_scheme_total_rate(const struct NbmlcScheme *scheme);

/**
 * Monte-Carlo simulation of one Eb/N0 point; `workers` 0 uses every core.
 */
enum NbmlcStatus nbmlc_sim_run_point(const struct NbmlcScheme *scheme,
                                     double ebn0_db,
                                     uint64_t min_block_errors,
                                     uint64_t max_trials,
                                     uint32_t max_iterations,
                                     size_t workers,
                                     uint64_t seed,
                                     struct NbmlcSimPoint *out);

/**
 * Per-iteration complexity estimate.
 */
enum NbmlcStatus nbmlc_complexity(size_t n,
                                  double rate,
                                  size_t q,
                                  double avg_check_degree,
                                  double avg_var_degree,
                                  size_t max_check_degree,
                                  struct NbmlcComplexity *out);

/**
 * Shannon limit (Eb/N0, dB) of uniform square `2^bits`-QAM at `rate`.
 */
enum NbmlcStatus nbmlc_shannon_limit(uint32_t bits, double rate, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NBMLC_H */
