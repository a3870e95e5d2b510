#ifndef QTA_H
#define QTA_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QtaStatus {
  QTA_STATUS_OK = 0,
  QTA_STATUS_NULL_POINTER = 1,
  QTA_STATUS_INVALID_ARGUMENT = 2,
  QTA_STATUS_DIMENSION_MISMATCH = 3,
  QTA_STATUS_NOT_UNITARY = 4,
  QTA_STATUS_NOT_NORMALIZED = 5,
  QTA_STATUS_ANNIHILATED = 6,
  QTA_STATUS_NUMERICAL = 7,
  QTA_STATUS_IO = 8,
  QTA_STATUS_PANIC = 9,
} QtaStatus;

typedef struct QtaOperator QtaOperator;

typedef struct QtaRule QtaRule;

typedef struct QtaState QtaState;

typedef struct QtaTrajectory QtaTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or NULL after a successful call. The
// pointer stays valid until the next `qta_*` call on the same thread.
const char *qta_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qta_version(void);

// # Safety
// `out` must be writable.
enum QtaStatus qta_rule_cnot(struct QtaRule **out);

// Local rule made of one Haar-random 4×4 gate seeded by `(master, task)`.
//
// # Safety
// `out` must be writable.
enum QtaStatus qta_rule_haar(uint64_t master, uint64_t task, struct QtaRule **out);

// Local rule from `num_gates` row-major 4×4 complex matrices (32 doubles
// each), applied first to last.
//
// # Safety
// `data` must hold `32 * num_gates` doubles; `out` must be writable.
enum QtaStatus qta_rule_from_gates(const double *data, size_t num_gates, struct QtaRule **out);

// # Safety
// `rule` must come from a `qta_rule_*` constructor or be NULL.
void qta_rule_free(struct QtaRule *rule);

// # Safety
// `rule` must be a live handle; `out` must be writable.
enum QtaStatus qta_operator_build(const struct QtaRule *rule, size_t n, struct QtaOperator **out);

// Hilbert-space dimension `2^n`, or 0 for NULL.
//
// # Safety
// `op` must be a live handle or NULL.
size_t qta_operator_dim(const struct QtaOperator *op);

// Largest entry of `U·T − T·U` for the cyclic translation `T`.
//
// # Safety
// `op` must be a live handle; `out` must be writable.
enum QtaStatus qta_operator_translation_defect(const struct QtaOperator *op, double *out);

// # Safety
// `op` must come from [`qta_operator_build`] or be NULL.
void qta_operator_free(struct QtaOperator *op);

// # Safety
// `out` must be writable.
enum QtaStatus qta_state_basis(size_t n, size_t index, struct QtaState **out);

// Seeded Gaussian random state on `n` qubits.
//
// # Safety
// `out` must be writable.
enum QtaStatus qta_state_random(size_t n, uint64_t master, uint64_t task, struct QtaState **out);

// State from `dim` interleaved complex amplitudes; must be normalized.
//
// # Safety
// `data` must hold `2 * dim` doubles; `out` must be writable.
enum QtaStatus qta_state_from_amplitudes(const double *data, size_t dim, struct QtaState **out);

// # Safety
// `state` must be a live handle or NULL.
size_t qta_state_dim(const struct QtaState *state);

// Copies the amplitudes as `2 * dim` interleaved doubles.
//
// # Safety
// `state` must be a live handle; `out` must hold `len` doubles.
enum QtaStatus qta_state_amplitudes(const struct QtaState *state, double *out, size_t len);

// # Safety
// `state` must come from a `qta_state_*` constructor or be NULL.
void qta_state_free(struct QtaState *state);

// Evolves `state` for `steps` steps.
//
// # Safety
// `state` and `op` must be live handles; `out` must be writable.
enum QtaStatus qta_evolve(const struct QtaState *state,
                          const struct QtaOperator *op,
                          size_t steps,
                          struct QtaTrajectory **out);

// Number of stored rows, `steps + 1`, or 0 for NULL.
//
// # Safety
// `traj` must be a live handle or NULL.
size_t qta_trajectory_len(const struct QtaTrajectory *traj);

// Copies the probabilities as a row-major `len(traj) × dim` table.
//
// # Safety
// `traj` must be a live handle; `out` must hold `len` doubles.
enum QtaStatus qta_trajectory_probabilities(const struct QtaTrajectory *traj,
                                            double *out,
                                            size_t len);

// New state handle holding row `t` of the trajectory.
//
// # Safety
// `traj` must be a live handle; `out` must be writable.
enum QtaStatus qta_trajectory_state(const struct QtaTrajectory *traj,
                                    size_t t,
                                    struct QtaState **out);

// # Safety
// `traj` must come from [`qta_evolve`] or be NULL.
void qta_trajectory_free(struct QtaTrajectory *traj);

// Equilibration time of the trajectory's probabilities. `*t_eq` is set only
// when `*equilibrated` is nonzero.
//
// # Safety
// `traj` must be a live handle; the out pointers must be writable.
enum QtaStatus qta_equilibration_time(const struct QtaTrajectory *traj,
                                      double epsilon,
                                      size_t window,
                                      size_t horizon,
                                      bool *equilibrated,
                                      size_t *t_eq);

// Coarse complexity `Σλ²` of the reversal operator taking `psi_t` back to
// `psi0`.
//
// # Safety
// Both states must be live handles; `out` must be writable.
enum QtaStatus qta_complexity(const struct QtaState *psi0,
                              const struct QtaState *psi_t,
                              double *out);

// Shannon entropy in bits of `len` probabilities.
//
// # Safety
// `probs` must hold `len` doubles; `out` must be writable.
enum QtaStatus qta_shannon_entropy(const double *probs, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTA_H */
