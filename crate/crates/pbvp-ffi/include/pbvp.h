#ifndef PBVP_H
#define PBVP_H

/* Generated by cbindgen from the pbvp-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of an FFI call. The numeric values match the CLI exit codes.
typedef enum PbvpStatus {
  PBVP_STATUS_OK = 0,
  // verify: hypotheses failed, criterion not applicable
  PBVP_STATUS_HYPOTHESES_NOT_MET = 1,
  PBVP_STATUS_CONFIG = 2,
  PBVP_STATUS_NUMERIC = 3,
  PBVP_STATUS_ANOMALY = 4,
  PBVP_STATUS_NO_CONVERGENCE = 5,
  PBVP_STATUS_BRACKET = 6,
  // null pointer, bad UTF-8, undersized buffer
  PBVP_STATUS_INVALID_ARGUMENT = 7,
} PbvpStatus;

// A parsed problem definition (see the config format in the README).
typedef struct PbvpConfig PbvpConfig;

// Result of the monotone iteration.
typedef struct PbvpIteration PbvpIteration;

// Solution of the linear problem plus its diagnostics.
typedef struct PbvpLinearSolution PbvpLinearSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static C string.
const char *pbvp_version(void);

// Message for the most recent failure on this thread. Never null; empty
// before the first failure. Valid until the next failing call.
const char *pbvp_last_error_message(void);

// Parse a config from JSON text.
//
// # Safety
// `text` must be a valid NUL-terminated string; `out` must be a valid
// pointer to a handle slot.
enum PbvpStatus pbvp_config_parse(const char *text, struct PbvpConfig **out);

// Read and parse a config file.
//
// # Safety
// As [`pbvp_config_parse`], with `path` a NUL-terminated file path.
enum PbvpStatus pbvp_config_read(const char *path, struct PbvpConfig **out);

// # Safety
// `cfg` must be a handle from this library or null.
void pbvp_config_free(struct PbvpConfig *cfg);

// Solve the `linear` section of a config. `n_override = 0` keeps the
// config's grid.
//
// # Safety
// `cfg` must be a live config handle; `out` a valid slot.
enum PbvpStatus pbvp_solve_linear(const struct PbvpConfig *cfg,
                                  uintptr_t n_override,
                                  struct PbvpLinearSolution **out);

// Number of grid nodes (`n + 1`).
//
// # Safety
// `sol` must be a live solution handle.
uintptr_t pbvp_linear_solution_num_nodes(const struct PbvpLinearSolution *sol);

// # Safety
// `sol` must be a live solution handle.
double pbvp_linear_solution_c1(const struct PbvpLinearSolution *sol);

// # Safety
// `sol` must be a live solution handle.
double pbvp_linear_solution_c2(const struct PbvpLinearSolution *sol);

// `u'(0)`.
//
// # Safety
// `sol` must be a live solution handle.
double pbvp_linear_solution_du0(const struct PbvpLinearSolution *sol);

// `u'(2pi)`.
//
// # Safety
// `sol` must be a live solution handle.
double pbvp_linear_solution_du2pi(const struct PbvpLinearSolution *sol);

// Copy the grid nodes `t_i` into `buf` (capacity `len`).
//
// # Safety
// `sol` must be a live solution handle; `buf` must point at `len`
// writable doubles.
enum PbvpStatus pbvp_linear_solution_copy_nodes(const struct PbvpLinearSolution *sol,
                                                double *buf,
                                                uintptr_t len);

// Copy the solution values `u(t_i)` into `buf` (capacity `len`).
//
// # Safety
// As [`pbvp_linear_solution_copy_nodes`].
enum PbvpStatus pbvp_linear_solution_copy_values(const struct PbvpLinearSolution *sol,
                                                 double *buf,
                                                 uintptr_t len);

// # Safety
// `sol` must be a handle from this library or null.
void pbvp_linear_solution_free(struct PbvpLinearSolution *sol);

// Run the monotone iteration for a config with `problem` and `bracket`
// sections. Returns `PBVP_STATUS_OK` on convergence and
// `PBVP_STATUS_NO_CONVERGENCE` (with a usable handle) when the iteration
// budget ran out; `force != 0` overrides failing bracket validation.
//
// # Safety
// `cfg` must be a live config handle; `out` a valid slot.
enum PbvpStatus pbvp_iterate(const struct PbvpConfig *cfg,
                             uintptr_t n_override,
                             int force,
                             struct PbvpIteration **out);

// # Safety
// `it` must be a live iteration handle.
int pbvp_iteration_converged(const struct PbvpIteration *it);

// Number of steps that moved an iterate.
//
// # Safety
// `it` must be a live iteration handle.
uintptr_t pbvp_iteration_iterations(const struct PbvpIteration *it);

// Zero when bracket validation was overridden and failed.
//
// # Safety
// `it` must be a live iteration handle.
int pbvp_iteration_hypotheses_met(const struct PbvpIteration *it);

// # Safety
// `it` must be a live iteration handle.
uintptr_t pbvp_iteration_num_nodes(const struct PbvpIteration *it);

// `sup(psi - phi)`, the width between the extremal solutions.
//
// # Safety
// `it` must be a live iteration handle.
double pbvp_iteration_gap(const struct PbvpIteration *it);

// Largest monotone-chain violation observed.
//
// # Safety
// `it` must be a live iteration handle.
double pbvp_iteration_chain_violation(const struct PbvpIteration *it);

// Copy the minimal solution `phi` into `buf`.
//
// # Safety
// `it` must be a live iteration handle; `buf` as in the other copies.
enum PbvpStatus pbvp_iteration_copy_phi(const struct PbvpIteration *it, double *buf, uintptr_t len);

// Copy the maximal solution `psi` into `buf`.
//
// # Safety
// As [`pbvp_iteration_copy_phi`].
enum PbvpStatus pbvp_iteration_copy_psi(const struct PbvpIteration *it, double *buf, uintptr_t len);

// # Safety
// `it` must be a handle from this library or null.
void pbvp_iteration_free(struct PbvpIteration *it);

// Check one of the sign-comparison criteria (`"2.1"`, `"2.2"`, `"2.3"`,
// `"2.4"`) for the candidate expression `u_expr`. `omega_expr` may be
// null for `2.2`; for `2.3` it must evaluate to a nonnegative constant.
// `n = 0` picks the default grid.
//
// Returns `PBVP_STATUS_OK` when the hypotheses pass and the conclusion
// holds, `PBVP_STATUS_HYPOTHESES_NOT_MET` when the criterion is not
// applicable, `PBVP_STATUS_ANOMALY` when hypotheses pass but the
// conclusion fails. `out_extremum` (nullable) receives the extremal
// value of `u` that the conclusion constrains.
//
// # Safety
// String arguments must be NUL-terminated; `out_extremum` must be null
// or a valid double slot.
enum PbvpStatus pbvp_verify(const char *criterion,
                            const char *u_expr,
                            const char *omega_expr,
                            double m,
                            uintptr_t n,
                            double *out_extremum);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PBVP_H */
