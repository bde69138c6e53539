#ifndef QMULTISLICE_H
#define QMULTISLICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum QmsStatus {
  QMS_STATUS_OK = 0,
  QMS_STATUS_NULL_POINTER = 1,
  QMS_STATUS_INVALID_ARGUMENT = 2,
  QMS_STATUS_SHAPE_MISMATCH = 3,
  QMS_STATUS_CONFIG = 4,
  QMS_STATUS_IO = 5,
  QMS_STATUS_PARSE = 6,
  QMS_STATUS_NUMERIC = 7,
  QMS_STATUS_PANIC = 8,
} QmsStatus;

// Which engine [`qms_simulate`] uses.
typedef enum QmsEngine {
  QMS_ENGINE_CLASSICAL = 0,
  QMS_ENGINE_QUANTUM_EXACT = 1,
  QMS_ENGINE_QUANTUM_TRUNCATED = 2,
} QmsEngine;

// Opaque gate sequence.
typedef struct QmsCircuit QmsCircuit;

// Opaque simulation setup (grid plus phase fields).
typedef struct QmsSetup QmsSetup;

// Opaque statevector.
typedef struct QmsState QmsState;

typedef struct QmsBeam {
  double voltage;
  // Angstrom.
  double wavelength;
  double mass_ratio;
  // rad / (V angstrom).
  double sigma;
  // 1/angstrom.
  double wavenumber;
} QmsBeam;

typedef struct QmsCensus {
  uint64_t one_qubit;
  uint64_t two_qubit;
  uint64_t total;
  uint64_t hadamard;
  uint64_t parity_phase;
  uint64_t controlled_phase;
  uint64_t cnot;
  uint64_t swap;
} QmsCensus;

// Summary of one simulation. Counts are zero for the classical engine.
typedef struct QmsRunSummary {
  uint64_t slices;
  double norm_drift;
  uint64_t s_v;
  uint64_t s_p;
  struct QmsCensus census;
} QmsRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call on the same thread; empty if none failed.
const char *qms_last_error(void);

// Library version as a static NUL-terminated string.
const char *qms_version(void);

// Relativistic beam quantities for `voltage` volts.
//
// # Safety
// `out` must be valid for a write of one `QmsBeam`.
enum QmsStatus qms_beam_params(double voltage, struct QmsBeam *out);

// Normalized Walsh spectrum of `len` values (a power of two) into `out`.
//
// # Safety
// `values` and `out` must each point to `len` doubles.
enum QmsStatus qms_fwht(const double *values, size_t len, double *out);

// `sum |x - x_hat| / sum |x_hat|`.
//
// # Safety
// `x` and `x_hat` must each point to `len` doubles; `out` to one.
enum QmsStatus qms_relative_error(const double *x, const double *x_hat, size_t len, double *out);

// QFT (`inverse == false`) or its inverse on `qubits` qubits.
//
// # Safety
// `out` must be valid for a write of one pointer.
enum QmsStatus qms_circuit_qft(size_t qubits, bool inverse, struct QmsCircuit **out);

// Circuit for `diag(e^{i phases[r]})` keeping Walsh terms with
// `|W| >= tau * w_max`; `tau = 0` is exact up to a global phase.
//
// # Safety
// `phases` must point to `len` doubles; `out` must be writable.
enum QmsStatus qms_circuit_phase(const double *phases,
                                 size_t len,
                                 double tau,
                                 struct QmsCircuit **out);

// Parses the line-oriented text form written by `qms_circuit_to_text`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum QmsStatus qms_circuit_from_text(const char *text, struct QmsCircuit **out);

// Writes the text form into `buf` (NUL-terminated) and its length without
// the NUL into `needed`. Pass `buf = NULL` to query the size.
//
// # Safety
// `buf` must be NULL or point to `cap` bytes; `needed` must be writable.
enum QmsStatus qms_circuit_to_text(const struct QmsCircuit *circuit,
                                   char *buf,
                                   size_t cap,
                                   size_t *needed);

// # Safety
// `circuit` must be a live handle; `qubits` must be writable.
enum QmsStatus qms_circuit_qubits(const struct QmsCircuit *circuit, size_t *qubits);

// # Safety
// `circuit` must be a live handle; `out` must be writable.
enum QmsStatus qms_circuit_census(const struct QmsCircuit *circuit, struct QmsCensus *out);

// Applies `circuit` to `state` in place.
//
// # Safety
// Both handles must be live.
enum QmsStatus qms_circuit_apply(const struct QmsCircuit *circuit, struct QmsState *state);

// # Safety
// `circuit` must be NULL or a handle not yet freed.
void qms_circuit_free(struct QmsCircuit *circuit);

// `|0...0>` on `qubits` qubits.
//
// # Safety
// `out` must be writable.
enum QmsStatus qms_state_zero(size_t qubits, struct QmsState **out);

// State from `len` interleaved (re, im) pairs; must already be normalized.
//
// # Safety
// `re_im` must point to `2 * len` doubles; `out` must be writable.
enum QmsStatus qms_state_from_amplitudes(const double *re_im, size_t len, struct QmsState **out);

// # Safety
// `state` must be a live handle; `len` must be writable.
enum QmsStatus qms_state_len(const struct QmsState *state, size_t *len);

// Copies the amplitudes as interleaved (re, im) pairs.
//
// # Safety
// `re_im` must point to `2 * len` doubles with `len` the state length.
enum QmsStatus qms_state_amplitudes(const struct QmsState *state, double *re_im, size_t len);

// Draws `shots` measurements with a seeded generator into `counts`.
//
// # Safety
// `counts` must point to `len` integers with `len` the state length.
enum QmsStatus qms_state_sample(const struct QmsState *state,
                                uint64_t shots,
                                uint64_t seed,
                                uint64_t *counts,
                                size_t len);

// # Safety
// `state` must be NULL or a handle not yet freed.
void qms_state_free(struct QmsState *state);

// Default gold setup with `2^bits` pixels per axis and `cells_z` cells deep.
//
// # Safety
// `out` must be writable.
enum QmsStatus qms_setup_default(uint32_t bits, size_t cells_z, struct QmsSetup **out);

// Setup from a JSON configuration file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum QmsStatus qms_setup_from_config(const char *path, struct QmsSetup **out);

// Pixels per axis.
//
// # Safety
// `setup` must be a live handle; `axis_len` must be writable.
enum QmsStatus qms_setup_axis_len(const struct QmsSetup *setup, size_t *axis_len);

// Runs a full simulation and writes the final probability grid
// (`axis_len^2` values, row-major) into `probability`.
//
// # Safety
// `setup` must be live, `probability` must hold `len` doubles, and
// `summary` must be NULL or writable.
enum QmsStatus qms_simulate(const struct QmsSetup *setup,
                            enum QmsEngine engine,
                            double tau_v,
                            double tau_p,
                            double *probability,
                            size_t len,
                            struct QmsRunSummary *summary);

// # Safety
// `setup` must be NULL or a handle not yet freed.
void qms_setup_free(struct QmsSetup *setup);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMULTISLICE_H */
