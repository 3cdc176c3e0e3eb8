/* Generated by cbindgen from lvsim-ffi. Do not edit. */

#ifndef LVSIM_H
#define LVSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LvsimStatus {
  LVSIM_STATUS_OK = 0,
  LVSIM_STATUS_NULL_POINTER = 1,
  LVSIM_STATUS_INVALID_ARGUMENT = 2,
  LVSIM_STATUS_NUMERICAL_FAILURE = 3,
  LVSIM_STATUS_BUFFER_TOO_SMALL = 4,
  LVSIM_STATUS_PANIC = 5,
} LvsimStatus;

typedef enum LvsimAxis {
  LVSIM_AXIS_X = 0,
  LVSIM_AXIS_Y = 1,
  LVSIM_AXIS_Z = 2,
} LvsimAxis;

typedef enum LvsimViolationClass {
  LVSIM_VIOLATION_CLASS_NONE = 0,
  LVSIM_VIOLATION_CLASS_CLASSICAL = 1,
  LVSIM_VIOLATION_CLASS_QUANTUM = 2,
} LvsimViolationClass;

typedef enum LvsimGenerator {
  LVSIM_GENERATOR_JX = 0,
  LVSIM_GENERATOR_JY = 1,
  LVSIM_GENERATOR_JZ = 2,
  LVSIM_GENERATOR_JZ_SQUARED = 3,
} LvsimGenerator;

/*
 Opaque fringe record.
 */
typedef struct LvsimFringe LvsimFringe;

/*
 Opaque spin-operator set.
 */
typedef struct LvsimSpinOps LvsimSpinOps;

/*
 Trap and magnetic parameters in SI units.
 */
typedef struct LvsimTrap {
  double mass_kg;
  double omega0_rad_s;
  uint32_t n;
  double mu_j_per_t;
  double b_field_t;
} LvsimTrap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or NULL. Valid until the next
 failing call on this thread.
 */
const char *lvsim_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *lvsim_version(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void lvsim_string_free(char *s);

/*
 Builds spin operators for `j = twice_j / 2`.

 # Safety
 `out` must be a valid pointer.
 */
enum LvsimStatus lvsim_spin_ops_new(uint32_t twice_j, struct LvsimSpinOps **out);

/*
 # Safety
 `ops` must come from [`lvsim_spin_ops_new`] or be NULL.
 */
void lvsim_spin_ops_free(struct LvsimSpinOps *ops);

/*
 Hilbert-space dimension, or 0 for NULL.

 # Safety
 `ops` must be a valid handle or NULL.
 */
size_t lvsim_spin_ops_dim(const struct LvsimSpinOps *ops);

/*
 Writes `exp(-i angle J_axis)` row-major into `re`/`im`, each of `len >= d²`.

 # Safety
 `re` and `im` must hold `len` writable doubles.
 */
enum LvsimStatus lvsim_rotation(const struct LvsimSpinOps *ops,
                                enum LvsimAxis axis,
                                double angle,
                                double *re,
                                double *im,
                                size_t len);

/*
 Max-norm gap between the pulse-product LV Ramsey operator and its closed form.

 # Safety
 `ops` must be a valid handle and `out` a valid pointer.
 */
enum LvsimStatus lvsim_ramsey_identity_error(const struct LvsimSpinOps *ops,
                                             double phi,
                                             double kappa_t,
                                             double *out);

/*
 `⟨J,m|T₀⁽²⁾|J,m⟩` in units of `reduced`.

 # Safety
 `out` must be a valid pointer.
 */
enum LvsimStatus lvsim_t20_diagonal(uint32_t twice_j, double m, double reduced, double *out);

/*
 `κ` in rad/s from `C₀⁽²⁾`, the frequency factor in Hz and `Δ(m²)`.

 # Safety
 `out` must be a valid pointer.
 */
enum LvsimStatus lvsim_kappa_from_c02(double c02, double freq_hz, double delta_m_sq, double *out);

/*
 `κ t (m₁² − m₂²)`.

 # Safety
 `out` must be a valid pointer.
 */
enum LvsimStatus lvsim_relative_lv_phase(uint32_t twice_j,
                                         double m1,
                                         double m2,
                                         double kappa,
                                         double t,
                                         double *out);

/*
 Yb-171 example trap.

 # Safety
 `out` must be a valid pointer.
 */
enum LvsimStatus lvsim_trap_default(struct LvsimTrap *out);

/*
 `a′` in J bounded by the level shift `h C₀⁽²⁾ f`.

 # Safety
 `trap` and `out` must be valid pointers.
 */
enum LvsimStatus lvsim_constrain_a_prime(double c02,
                                         double freq_hz,
                                         const struct LvsimTrap *trap,
                                         double *out);

/*
 First-order trap energy shift in J for a given `a′`.

 # Safety
 `trap` and `out` must be valid pointers.
 */
enum LvsimStatus lvsim_energy_shift_lli(const struct LvsimTrap *trap, double a_prime, double *out);

/*
 Classifies the violation matrix `[[a′, b′], [b′*, c′]]` (J) at tolerance `tol` (J).

 # Safety
 `out` must be a valid pointer.
 */
enum LvsimStatus lvsim_classify_violation(double a_prime,
                                          double b_re,
                                          double b_im,
                                          double c_prime,
                                          double tol,
                                          enum LvsimViolationClass *out);

/*
 Spin-flip probability after time `t` (s) at momentum `p` (kg m/s).

 # Safety
 `trap` and `out` must be valid pointers.
 */
enum LvsimStatus lvsim_transition_probability(const struct LvsimTrap *trap,
                                              double a_prime,
                                              double b_re,
                                              double b_im,
                                              double c_prime,
                                              bool initial_up,
                                              double p,
                                              double t,
                                              double *out);

/*
 Pure-state quantum Fisher information `4 Var(G)` for the chosen generator.

 # Safety
 `re`/`im` must hold `len` doubles; `ops` and `out` must be valid.
 */
enum LvsimStatus lvsim_qfi_pure(const struct LvsimSpinOps *ops,
                                enum LvsimGenerator generator,
                                const double *re,
                                const double *im,
                                size_t len,
                                double *out);

/*
 Entanglement entropy (nats) of a normalised `dim_a × dim_b` pure state.

 # Safety
 `re`/`im` must hold `dim_a * dim_b` doubles; `out` must be valid.
 */
enum LvsimStatus lvsim_entanglement_entropy(size_t dim_a,
                                            size_t dim_b,
                                            const double *re,
                                            const double *im,
                                            double *out);

/*
 Monte-Carlo `κ` estimation with the default pair protocol; writes the
 mean estimate and its standard deviation.

 # Safety
 `out_mean` and `out_sigma` must be valid pointers.
 */
enum LvsimStatus lvsim_estimate_kappa(double true_kappa,
                                      double t,
                                      size_t n_atoms,
                                      uint64_t shots_per_atom,
                                      size_t trials,
                                      uint64_t seed,
                                      double *out_mean,
                                      double *out_sigma);

/*
 Ramsey fringe on `|j, +j⟩` with `J_z` readout over `n_points` phases in
 `[phi_start, phi_stop)`.

 # Safety
 `ops` must be a valid handle and `out` a valid pointer.
 */
enum LvsimStatus lvsim_fringe_generate_ramsey(const struct LvsimSpinOps *ops,
                                              double kappa,
                                              double t,
                                              double phi_start,
                                              double phi_stop,
                                              size_t n_points,
                                              uint64_t shots,
                                              uint64_t seed,
                                              struct LvsimFringe **out);

/*
 # Safety
 `f` must come from this library or be NULL.
 */
void lvsim_fringe_free(struct LvsimFringe *f);

/*
 Number of scan phases, or 0 for NULL.

 # Safety
 `f` must be a valid handle or NULL.
 */
size_t lvsim_fringe_len(const struct LvsimFringe *f);

/*
 Number of readout outcomes, or 0 for NULL.

 # Safety
 `f` must be a valid handle or NULL.
 */
size_t lvsim_fringe_num_outcomes(const struct LvsimFringe *f);

/*
 Probability of outcome `k` at scan index `i`.

 # Safety
 `f` and `out` must be valid pointers.
 */
enum LvsimStatus lvsim_fringe_probability(const struct LvsimFringe *f,
                                          size_t i,
                                          size_t k,
                                          double *out);

/*
 Fringe record as JSON; free with [`lvsim_string_free`].

 # Safety
 `f` and `out` must be valid pointers.
 */
enum LvsimStatus lvsim_fringe_to_json(const struct LvsimFringe *f, char **out);

/*
 Fringe record as CSV; free with [`lvsim_string_free`].

 # Safety
 `f` and `out` must be valid pointers.
 */
enum LvsimStatus lvsim_fringe_to_csv(const struct LvsimFringe *f, char **out);

/*
 Parses a spin string such as `"7/2"` and writes `2j`.

 # Safety
 `s` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LvsimStatus lvsim_parse_spin(const char *s, uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LVSIM_H */
