//! C interface to the fibertrap library: opaque handles for the solved
//! guided mode and the calibrated coupling model, thin wrappers for the
//! closed-form estimators, and a per-thread error message channel.
//!
//! Every fallible function returns an [`FtStatus`]; on failure a
//! description is retrievable with [`ft_last_error`]. Handles returned
//! through `out` parameters own their object and must be released with the
//! matching `*_free` function exactly once.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::ptr;

use fibertrap::atom::AtomSpec;
use fibertrap::coupling::CouplingModel;
use fibertrap::fibermode::{silica_index, solve_he11, FiberSpec, GuidedMode, SolverOpts};
use fibertrap::inference::{estimate_beta, g2_theory, kappa, lower_bound_atoms};
use fibertrap::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FtStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent.
    InvalidInput = 2,
    /// The model has no solution for these inputs.
    Solver = 3,
    /// An iterative method ran out of iterations.
    NoConvergence = 4,
    /// A file could not be read or written.
    Io = 5,
}

/// Solved fundamental guided mode; create with [`ft_mode_solve`].
pub struct FtMode(GuidedMode);

/// Calibrated evanescent coupling model; create with
/// [`ft_coupling_calibrate`].
pub struct FtCoupling(CouplingModel);

thread_local! {
    /// Most recent error message, NUL terminated; empty when no call on
    /// this thread has failed yet.
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn record_error(message: String) {
    LAST_ERROR.with(|slot| {
        let mut buf = slot.borrow_mut();
        buf.clear();
        buf.extend_from_slice(message.as_bytes());
        buf.retain(|&b| b != 0);
        buf.push(0);
    });
}

fn fail(e: &Error) -> FtStatus {
    record_error(e.to_string());
    match e {
        Error::Domain(_) | Error::Input(_) | Error::Config(_) => FtStatus::InvalidInput,
        Error::Io(_) => FtStatus::Io,
        Error::Solver(_) => FtStatus::Solver,
        Error::NonConvergence(_) => FtStatus::NoConvergence,
    }
}

fn null_fail(what: &str) -> FtStatus {
    record_error(format!("{what} must not be null"));
    FtStatus::NullPointer
}

/// Copy the most recent error message on this thread into `buf` as a NUL
/// terminated string, truncating when `capacity` is too small. Returns the
/// full message length including the terminator, or 0 when nothing has
/// failed yet. Call with `capacity == 0` to query the length alone.
///
/// # Safety
/// When `capacity` is nonzero, `buf` must point to at least `capacity`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ft_last_error(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if msg.is_empty() {
            return 0;
        }
        if capacity > 0 && !buf.is_null() {
            let n = msg.len().min(capacity);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            // the copy is always terminated inside the caller's buffer
            *buf.add(n - 1) = 0;
        }
        msg.len()
    })
}

/// Fused-silica refractive index at `wavelength_m` (Sellmeier form, valid
/// through the near infrared).
#[no_mangle]
pub extern "C" fn ft_silica_index(wavelength_m: f64) -> f64 {
    silica_index(wavelength_m)
}

/// Solve the fundamental guided mode of a step-index fiber. Pass
/// `index_core <= 0` to use the fused-silica dispersion value at
/// `wavelength_m`; `index_clad` is 1 for a vacuum-clad nanofiber. On
/// success `*out` receives an owning handle; on failure it is set to null.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ft_mode_solve(
    radius_m: f64,
    wavelength_m: f64,
    index_core: f64,
    index_clad: f64,
    out: *mut *mut FtMode,
) -> FtStatus {
    if out.is_null() {
        return null_fail("out");
    }
    let core = if index_core > 0.0 {
        index_core
    } else {
        silica_index(wavelength_m)
    };
    let spec = FiberSpec {
        radius: radius_m,
        wavelength: wavelength_m,
        index_core: core,
        index_clad,
    };
    match solve_he11(&spec, &SolverOpts::default()) {
        Ok(mode) => {
            *out = Box::into_raw(Box::new(FtMode(mode)));
            FtStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(&e)
        }
    }
}

/// Release a handle from [`ft_mode_solve`]. Null is ignored.
///
/// # Safety
/// `mode` must be null or a pointer returned by [`ft_mode_solve`] that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn ft_mode_free(mode: *mut FtMode) {
    if !mode.is_null() {
        drop(Box::from_raw(mode));
    }
}

unsafe fn write_scalar<T>(
    value: Result<T, Error>,
    out: *mut T,
    out_name: &str,
) -> FtStatus {
    if out.is_null() {
        return null_fail(out_name);
    }
    match value {
        Ok(v) => {
            *out = v;
            FtStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Effective index of the solved mode.
///
/// # Safety
/// `mode` must be a live handle from [`ft_mode_solve`]; `out` must point
/// to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn ft_mode_n_eff(mode: *const FtMode, out: *mut f64) -> FtStatus {
    let Some(m) = mode.as_ref() else {
        return null_fail("mode");
    };
    write_scalar(Ok(m.0.n_eff), out, "out")
}

/// Transverse decay constant q of the evanescent tail (1/m).
///
/// # Safety
/// Same contract as [`ft_mode_n_eff`].
#[no_mangle]
pub unsafe extern "C" fn ft_mode_q_decay(mode: *const FtMode, out: *mut f64) -> FtStatus {
    let Some(m) = mode.as_ref() else {
        return null_fail("mode");
    };
    write_scalar(Ok(m.0.q_decay), out, "out")
}

/// Normalized frequency V of the underlying fiber.
///
/// # Safety
/// Same contract as [`ft_mode_n_eff`].
#[no_mangle]
pub unsafe extern "C" fn ft_mode_v_number(mode: *const FtMode, out: *mut f64) -> FtStatus {
    let Some(m) = mode.as_ref() else {
        return null_fail("mode");
    };
    write_scalar(Ok(m.0.v_number), out, "out")
}

/// Normalized evanescent intensity at `distance_m` from the fiber surface.
///
/// # Safety
/// Same contract as [`ft_mode_n_eff`].
#[no_mangle]
pub unsafe extern "C" fn ft_mode_evanescent_intensity(
    mode: *const FtMode,
    distance_m: f64,
    out: *mut f64,
) -> FtStatus {
    let Some(m) = mode.as_ref() else {
        return null_fail("mode");
    };
    write_scalar(m.0.evanescent_intensity(distance_m), out, "out")
}

/// Build a coupling model from a solved mode by pinning the single-atom
/// guided fraction `anchor_beta` at `anchor_distance_m`. `gamma0` is the
/// free-space population decay rate in 1/s. On success `*out` receives an
/// owning handle; release it with [`ft_coupling_free`].
///
/// # Safety
/// `mode` must be a live handle from [`ft_mode_solve`]; `out` must point
/// to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ft_coupling_calibrate(
    mode: *const FtMode,
    gamma0: f64,
    anchor_distance_m: f64,
    anchor_beta: f64,
    out: *mut *mut FtCoupling,
) -> FtStatus {
    if out.is_null() {
        return null_fail("out");
    }
    let Some(m) = mode.as_ref() else {
        *out = ptr::null_mut();
        return null_fail("mode");
    };
    match CouplingModel::calibrate(m.0, gamma0, anchor_distance_m, anchor_beta) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(FtCoupling(model)));
            FtStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(&e)
        }
    }
}

/// Release a handle from [`ft_coupling_calibrate`]. Null is ignored.
///
/// # Safety
/// `coupling` must be null or a pointer returned by
/// [`ft_coupling_calibrate`] that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn ft_coupling_free(coupling: *mut FtCoupling) {
    if !coupling.is_null() {
        drop(Box::from_raw(coupling));
    }
}

/// Fraction of emission entering the guided mode for an atom at
/// `distance_m` from the surface.
///
/// # Safety
/// `coupling` must be a live handle from [`ft_coupling_calibrate`]; `out`
/// must point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn ft_coupling_beta_at(
    coupling: *const FtCoupling,
    distance_m: f64,
    out: *mut f64,
) -> FtStatus {
    let Some(c) = coupling.as_ref() else {
        return null_fail("coupling");
    };
    write_scalar(c.0.beta_at(distance_m), out, "out")
}

/// Emission rate into the guided mode (1/s) at `distance_m`.
///
/// # Safety
/// Same contract as [`ft_coupling_beta_at`].
#[no_mangle]
pub unsafe extern "C" fn ft_coupling_guided_rate(
    coupling: *const FtCoupling,
    distance_m: f64,
    out: *mut f64,
) -> FtStatus {
    let Some(c) = coupling.as_ref() else {
        return null_fail("coupling");
    };
    write_scalar(c.0.guided_rate(distance_m), out, "out")
}

/// Natural linewidth of the cesium D2 line (1/s).
#[no_mangle]
pub extern "C" fn ft_cs_gamma_natural() -> f64 {
    AtomSpec::cs_d2().gamma_natural()
}

/// Resonant Rabi frequency (rad/s) of the cesium D2 line at saturation
/// parameter `saturation`.
///
/// # Safety
/// `out` must point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn ft_cs_rabi_from_saturation(saturation: f64, out: *mut f64) -> FtStatus {
    write_scalar(AtomSpec::cs_d2().rabi_from_saturation(saturation), out, "out")
}

/// Steady-state photon scattering rate (1/s) of the cesium D2 line at
/// saturation parameter `saturation` and detuning `detuning` (rad/s).
///
/// # Safety
/// `out` must point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn ft_cs_scattering_rate(
    saturation: f64,
    detuning: f64,
    out: *mut f64,
) -> FtStatus {
    write_scalar(AtomSpec::cs_d2().scattering_rate(saturation, detuning), out, "out")
}

/// Generalized Rabi frequency kappa = sqrt((2*omega)^2 - (gamma/4)^2) of
/// the damped correlation oscillation, for transverse decay rate `gamma`
/// and Rabi frequency `omega` (both rad/s). Fails when the drive is too
/// weak to oscillate.
///
/// # Safety
/// `out` must point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn ft_kappa(gamma: f64, omega: f64, out: *mut f64) -> FtStatus {
    write_scalar(kappa(gamma, omega), out, "out")
}

/// Driven two-level correlation function with incoherent dilution: fills
/// `out[i] = g2(tau[i])` for `len` delays in seconds.
///
/// # Safety
/// `tau` must point to `len` readable doubles and `out` to `len` writable
/// doubles; the ranges must not overlap.
#[no_mangle]
pub unsafe extern "C" fn ft_g2_theory(
    gamma: f64,
    omega: f64,
    dilution: f64,
    tau: *const f64,
    len: usize,
    out: *mut f64,
) -> FtStatus {
    if tau.is_null() {
        return null_fail("tau");
    }
    if out.is_null() {
        return null_fail("out");
    }
    let delays = std::slice::from_raw_parts(tau, len);
    match g2_theory(gamma, omega, dilution, delays) {
        Ok(values) => {
            ptr::copy_nonoverlapping(values.as_ptr(), out, len);
            FtStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Assumption-free lower bound on the number of occupied windows implied
/// by a loaded zero fraction against a control zero fraction.
///
/// # Safety
/// `out` must point to writable storage for one uint64.
#[no_mangle]
pub unsafe extern "C" fn ft_lower_bound_atoms(
    zero_fraction_loaded: f64,
    zero_fraction_control: f64,
    n_windows: u64,
    out: *mut u64,
) -> FtStatus {
    write_scalar(
        lower_bound_atoms(zero_fraction_loaded, zero_fraction_control, n_windows),
        out,
        "out",
    )
}

/// Per-atom optical depth `d0 = od_peak/n_atoms` and guided-mode fraction
/// `beta = d0/2` from a saturated-absorption measurement.
///
/// # Safety
/// `d0_out` and `beta_out` must each point to writable storage for one
/// double.
#[no_mangle]
pub unsafe extern "C" fn ft_estimate_beta(
    od_peak: f64,
    n_atoms: u64,
    d0_out: *mut f64,
    beta_out: *mut f64,
) -> FtStatus {
    if d0_out.is_null() {
        return null_fail("d0_out");
    }
    if beta_out.is_null() {
        return null_fail("beta_out");
    }
    match estimate_beta(od_peak, n_atoms) {
        Ok((d0, beta)) => {
            *d0_out = d0;
            *beta_out = beta;
            FtStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
