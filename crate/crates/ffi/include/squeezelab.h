#ifndef SQUEEZELAB_H
#define SQUEEZELAB_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqzStatus {
  SQZ_STATUS_OK = 0,
  SQZ_STATUS_INVALID_ARGUMENT = 1,
  SQZ_STATUS_AXIS_TOO_NARROW = 2,
  SQZ_STATUS_ABOVE_THRESHOLD = 3,
  SQZ_STATUS_DEGENERATE_PUMP = 4,
  SQZ_STATUS_SINGULAR = 5,
  SQZ_STATUS_ZERO_REFERENCE = 6,
  SQZ_STATUS_NUMERICAL = 7,
  SQZ_STATUS_CONFIG = 8,
  SQZ_STATUS_IO = 9,
  SQZ_STATUS_NULL_POINTER = 10,
  SQZ_STATUS_BUFFER_TOO_SMALL = 11,
  SQZ_STATUS_PANIC = 12,
} SqzStatus;

typedef enum SqzPumpKind {
  SQZ_PUMP_KIND_GAUSSIAN = 0,
  SQZ_PUMP_KIND_RECTANGULAR = 1,
} SqzPumpKind;

// Opaque sampled kernel.
typedef struct SqzKernel SqzKernel;

// Opaque set of supermodes.
typedef struct SqzSupermodes SqzSupermodes;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the calling thread's last error message.
size_t sqz_last_error_length(void);

// Copy the last error message into `buf` as a NUL-terminated string,
// truncating to `len − 1` bytes. Returns the full message length.
size_t sqz_last_error_message(char *buf, size_t len);

// Modulated Gaussian kernel `K₊(x + x′) K₋(x − x′)` on an axis of
// `n_points` samples sized from the widths. Harmonics are given as
// parallel arrays of amplitudes and frequencies; the first frequency of
// each side must be 0.
enum SqzStatus sqz_kernel_modulated(double sigma_plus,
                                    double sigma_minus,
                                    const double *plus_b,
                                    const double *plus_beta,
                                    size_t n_plus,
                                    const double *minus_b,
                                    const double *minus_beta,
                                    size_t n_minus,
                                    size_t n_points,
                                    struct SqzKernel **out_kernel);

// Single-crystal SPOPO kernel; `tau1` and `tau_p` share a time unit and
// the axis is in units of `1/tau1`. `pump_kind` takes an `SqzPumpKind` value.
enum SqzStatus sqz_kernel_spopo(double tau1,
                                int32_t pump_kind,
                                double tau_p,
                                size_t n_points,
                                struct SqzKernel **out_kernel);

void sqz_kernel_free(struct SqzKernel *kernel);

// Number of axis samples; 0 for a null handle.
size_t sqz_kernel_dim(const struct SqzKernel *kernel);

// Axis sample positions, `dim` values.
enum SqzStatus sqz_kernel_axis(const struct SqzKernel *kernel, double *buf, size_t len);

// Kernel samples, `dim × dim` row-major.
enum SqzStatus sqz_kernel_values(const struct SqzKernel *kernel, double *buf, size_t len);

// Diagonalize; eigenvalues below `floor · |Λ₁|` are dropped. With
// `eigenfunctions == 0` only the spectrum is computed.
enum SqzStatus sqz_supermodes_solve(const struct SqzKernel *kernel,
                                    double floor,
                                    int32_t eigenfunctions,
                                    struct SqzSupermodes **out_modes);

void sqz_supermodes_free(struct SqzSupermodes *modes);

// Number of retained supermodes; 0 for a null handle.
size_t sqz_supermodes_count(const struct SqzSupermodes *modes);

// Eigenvalues sorted by magnitude, `count` values.
enum SqzStatus sqz_supermodes_eigenvalues(const struct SqzSupermodes *modes,
                                          double *buf,
                                          size_t len);

// Eigenfunction `index` (0-based) sampled on the kernel axis.
enum SqzStatus sqz_supermodes_mode(const struct SqzSupermodes *modes,
                                   size_t index,
                                   double *buf,
                                   size_t len);

// Pump parameter at threshold, `1/|Λ₁|`.
enum SqzStatus sqz_supermodes_threshold(const struct SqzSupermodes *modes, double *out_value);

// Squeezed-quadrature noise at normalized pump `r` and frequency `omega`.
double sqz_v_minus(double r, double omega);

// Anti-squeezed-quadrature noise.
double sqz_v_plus(double r, double omega);

// Coupling `χ_l` of family `f` (signal spot size `w_s`) with a pump made of
// `n` Gaussian beams of relative widths `rhos` and amplitudes `amps`.
enum SqzStatus sqz_chi_overlap(size_t f,
                               double w_s,
                               size_t l,
                               const double *amps,
                               const double *rhos,
                               size_t n,
                               double *out_value);

// Angle θ of the pump `G_a cos θ − G_b sin θ` giving `χ₁ = 0` in family 3.
enum SqzStatus sqz_mixing_angle_null(double rho_a, double rho_b, double *out_theta);

// Angle θ giving `χ₁ = −χ₃` in family 3.
enum SqzStatus sqz_mixing_angle_opposite(double rho_a, double rho_b, double *out_theta);

// `2n × 2n` covariance (order `X₁..Xₙ, P₁..Pₙ`, vacuum = identity) of the
// `n`-mode GHZ-like state from inputs squeezed by `r`, row-major.
enum SqzStatus sqz_ghz_covariance(size_t n, double r, double *buf, size_t len);

// `Var(ΣX)` and the largest `Var(P_j − P_{j+1})` of the GHZ-like state.
enum SqzStatus sqz_ghz_joint_variances(size_t n,
                                       double r,
                                       double *out_var_sum_x,
                                       double *out_max_var_p_diff);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQUEEZELAB_H */
