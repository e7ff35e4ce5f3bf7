/* C interface to the fibertrap toolkit. Generated by cbindgen; do not edit. */

#ifndef FIBERTRAP_H
#define FIBERTRAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum FtStatus {
  FT_STATUS_OK = 0,
  // A required pointer argument was null.
  FT_STATUS_NULL_POINTER = 1,
  // An argument was out of range or inconsistent.
  FT_STATUS_INVALID_INPUT = 2,
  // The model has no solution for these inputs.
  FT_STATUS_SOLVER = 3,
  // An iterative method ran out of iterations.
  FT_STATUS_NO_CONVERGENCE = 4,
  // A file could not be read or written.
  FT_STATUS_IO = 5,
} FtStatus;

// Calibrated evanescent coupling model; create with
// [`ft_coupling_calibrate`].
typedef struct FtCoupling FtCoupling;

// Solved fundamental guided mode; create with [`ft_mode_solve`].
typedef struct FtMode FtMode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the most recent error message on this thread into `buf` as a NUL
// terminated string, truncating when `capacity` is too small. Returns the
// full message length including the terminator, or 0 when nothing has
// failed yet. Call with `capacity == 0` to query the length alone.
//
// # Safety
// When `capacity` is nonzero, `buf` must point to at least `capacity`
// writable bytes.
uintptr_t ft_last_error(char *buf, uintptr_t capacity);

// Fused-silica refractive index at `wavelength_m` (Sellmeier form, valid
// through the near infrared).
double ft_silica_index(double wavelength_m);

// Solve the fundamental guided mode of a step-index fiber. Pass
// `index_core <= 0` to use the fused-silica dispersion value at
// `wavelength_m`; `index_clad` is 1 for a vacuum-clad nanofiber. On
// success `*out` receives an owning handle; on failure it is set to null.
//
// # Safety
// `out` must point to writable storage for one pointer.
enum FtStatus ft_mode_solve(double radius_m,
                            double wavelength_m,
                            double index_core,
                            double index_clad,
                            struct FtMode **out);

// Release a handle from [`ft_mode_solve`]. Null is ignored.
//
// # Safety
// `mode` must be null or a pointer returned by [`ft_mode_solve`] that has
// not been freed already.
void ft_mode_free(struct FtMode *mode);

// Effective index of the solved mode.
//
// # Safety
// `mode` must be a live handle from [`ft_mode_solve`]; `out` must point
// to writable storage for one double.
enum FtStatus ft_mode_n_eff(const struct FtMode *mode, double *out);

// Transverse decay constant q of the evanescent tail (1/m).
//
// # Safety
// Same contract as [`ft_mode_n_eff`].
enum FtStatus ft_mode_q_decay(const struct FtMode *mode, double *out);

// Normalized frequency V of the underlying fiber.
//
// # Safety
// Same contract as [`ft_mode_n_eff`].
enum FtStatus ft_mode_v_number(const struct FtMode *mode, double *out);

// Normalized evanescent intensity at `distance_m` from the fiber surface.
//
// # Safety
// Same contract as [`ft_mode_n_eff`].
enum FtStatus ft_mode_evanescent_intensity(const struct FtMode *mode,
                                           double distance_m,
                                           double *out);

// Build a coupling model from a solved mode by pinning the single-atom
// guided fraction `anchor_beta` at `anchor_distance_m`. `gamma0` is the
// free-space population decay rate in 1/s. On success `*out` receives an
// owning handle; release it with [`ft_coupling_free`].
//
// # Safety
// `mode` must be a live handle from [`ft_mode_solve`]; `out` must point
// to writable storage for one pointer.
enum FtStatus ft_coupling_calibrate(const struct FtMode *mode,
                                    double gamma0,
                                    double anchor_distance_m,
                                    double anchor_beta,
                                    struct FtCoupling **out);

// Release a handle from [`ft_coupling_calibrate`]. Null is ignored.
//
// # Safety
// `coupling` must be null or a pointer returned by
// [`ft_coupling_calibrate`] that has not been freed already.
void ft_coupling_free(struct FtCoupling *coupling);

// Fraction of emission entering the guided mode for an atom at
// `distance_m` from the surface.
//
// # Safety
// `coupling` must be a live handle from [`ft_coupling_calibrate`]; `out`
// must point to writable storage for one double.
enum FtStatus ft_coupling_beta_at(const struct FtCoupling *coupling,
                                  double distance_m,
                                  double *out);

// Emission rate into the guided mode (1/s) at `distance_m`.
//
// # Safety
// Same contract as [`ft_coupling_beta_at`].
enum FtStatus ft_coupling_guided_rate(const struct FtCoupling *coupling,
                                      double distance_m,
                                      double *out);

// Natural linewidth of the cesium D2 line (1/s).
double ft_cs_gamma_natural(void);

// Resonant Rabi frequency (rad/s) of the cesium D2 line at saturation
// parameter `saturation`.
//
// # Safety
// `out` must point to writable storage for one double.
enum FtStatus ft_cs_rabi_from_saturation(double saturation, double *out);

// Steady-state photon scattering rate (1/s) of the cesium D2 line at
// saturation parameter `saturation` and detuning `detuning` (rad/s).
//
// # Safety
// `out` must point to writable storage for one double.
enum FtStatus ft_cs_scattering_rate(double saturation, double detuning, double *out);

// Generalized Rabi frequency kappa = sqrt((2*omega)^2 - (gamma/4)^2) of
// the damped correlation oscillation, for transverse decay rate `gamma`
// and Rabi frequency `omega` (both rad/s). Fails when the drive is too
// weak to oscillate.
//
// # Safety
// `out` must point to writable storage for one double.
enum FtStatus ft_kappa(double gamma, double omega, double *out);

// Driven two-level correlation function with incoherent dilution: fills
// `out[i] = g2(tau[i])` for `len` delays in seconds.
//
// # Safety
// `tau` must point to `len` readable doubles and `out` to `len` writable
// doubles; the ranges must not overlap.
enum FtStatus ft_g2_theory(double gamma,
                           double omega,
                           double dilution,
                           const double *tau,
                           uintptr_t len,
                           double *out);

// Assumption-free lower bound on the number of occupied windows implied
// by a loaded zero fraction against a control zero fraction.
//
// # Safety
// `out` must point to writable storage for one uint64.
enum FtStatus ft_lower_bound_atoms(double zero_fraction_loaded,
                                   double zero_fraction_control,
                                   uint64_t n_windows,
                                   uint64_t *out);

// Per-atom optical depth `d0 = od_peak/n_atoms` and guided-mode fraction
// `beta = d0/2` from a saturated-absorption measurement.
//
// # Safety
// `d0_out` and `beta_out` must each point to writable storage for one
// double.
enum FtStatus ft_estimate_beta(double od_peak, uint64_t n_atoms, double *d0_out, double *beta_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIBERTRAP_H */
