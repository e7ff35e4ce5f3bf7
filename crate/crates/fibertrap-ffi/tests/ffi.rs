//! The C surface is a thin veneer: every wrapper must agree exactly with
//! the library call it forwards to, error paths must map to the right
//! status, and the handle lifecycle must tolerate null.

use std::ffi::CStr;
use std::ptr;

use fibertrap::atom::AtomSpec;
use fibertrap::coupling::CouplingModel;
use fibertrap::fibermode::{silica_index, solve_he11, FiberSpec, SolverOpts};
use fibertrap::inference::{estimate_beta, g2_theory, kappa, lower_bound_atoms};

use fibertrap_ffi::{
    ft_coupling_beta_at, ft_coupling_calibrate, ft_coupling_free, ft_coupling_guided_rate,
    ft_cs_gamma_natural, ft_cs_rabi_from_saturation, ft_cs_scattering_rate, ft_estimate_beta,
    ft_g2_theory, ft_kappa, ft_last_error, ft_lower_bound_atoms, ft_mode_evanescent_intensity,
    ft_mode_free, ft_mode_n_eff, ft_mode_q_decay, ft_mode_solve, ft_mode_v_number,
    ft_silica_index, FtCoupling, FtMode, FtStatus,
};

fn reference_mode() -> fibertrap::fibermode::GuidedMode {
    let spec = FiberSpec::new(155e-9, 852e-9, silica_index(852e-9));
    solve_he11(&spec, &SolverOpts::default()).unwrap()
}

fn solve_ffi() -> *mut FtMode {
    let mut handle: *mut FtMode = ptr::null_mut();
    let status = unsafe { ft_mode_solve(155e-9, 852e-9, 0.0, 1.0, &mut handle) };
    assert_eq!(status, FtStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let mut buf = [0u8; 256];
    let n = unsafe { ft_last_error(buf.as_mut_ptr().cast(), buf.len()) };
    assert!(n > 0 && n <= buf.len(), "error message missing or oversized");
    CStr::from_bytes_until_nul(&buf).unwrap().to_str().unwrap().to_string()
}

#[test]
fn mode_wrappers_match_the_library() {
    let reference = reference_mode();
    let handle = solve_ffi();
    let mut value = 0.0;
    unsafe {
        assert_eq!(ft_mode_n_eff(handle, &mut value), FtStatus::Ok);
        assert_eq!(value, reference.n_eff);
        assert_eq!(ft_mode_q_decay(handle, &mut value), FtStatus::Ok);
        assert_eq!(value, reference.q_decay);
        assert_eq!(ft_mode_v_number(handle, &mut value), FtStatus::Ok);
        assert_eq!(value, reference.v_number);
        assert_eq!(
            ft_mode_evanescent_intensity(handle, 190e-9, &mut value),
            FtStatus::Ok
        );
        assert_eq!(value, reference.evanescent_intensity(190e-9).unwrap());
        ft_mode_free(handle);
    }
    assert_eq!(ft_silica_index(852e-9), silica_index(852e-9));
}

#[test]
fn coupling_wrappers_match_the_library() {
    let gamma0 = ft_cs_gamma_natural();
    assert_eq!(gamma0, AtomSpec::cs_d2().gamma_natural());
    let reference = CouplingModel::calibrate(reference_mode(), gamma0, 671e-9, 0.006).unwrap();

    let mode = solve_ffi();
    let mut coupling: *mut FtCoupling = ptr::null_mut();
    let status = unsafe { ft_coupling_calibrate(mode, gamma0, 671e-9, 0.006, &mut coupling) };
    assert_eq!(status, FtStatus::Ok);
    let mut value = 0.0;
    unsafe {
        assert_eq!(ft_coupling_beta_at(coupling, 671e-9, &mut value), FtStatus::Ok);
        assert_eq!(value, reference.beta_at(671e-9).unwrap());
        assert!((value - 0.006).abs() < 1e-15);
        assert_eq!(ft_coupling_beta_at(coupling, 190e-9, &mut value), FtStatus::Ok);
        assert_eq!(value, reference.beta_at(190e-9).unwrap());
        assert_eq!(
            ft_coupling_guided_rate(coupling, 300e-9, &mut value),
            FtStatus::Ok
        );
        assert_eq!(value, reference.guided_rate(300e-9).unwrap());
        ft_coupling_free(coupling);
        ft_mode_free(mode);
    }
}

#[test]
fn scalar_wrappers_match_the_library() {
    let gamma = 2.0 * std::f64::consts::PI * 2.61e6;
    let omega = 2.0 * std::f64::consts::PI * 1.85e6;
    let mut value = 0.0;
    unsafe {
        assert_eq!(ft_kappa(gamma, omega, &mut value), FtStatus::Ok);
        assert_eq!(value, kappa(gamma, omega).unwrap());

        let tau: Vec<f64> = (-50..=50).map(|i| i as f64 * 4e-9).collect();
        let mut curve = vec![0.0; tau.len()];
        assert_eq!(
            ft_g2_theory(gamma, omega, 0.26, tau.as_ptr(), tau.len(), curve.as_mut_ptr()),
            FtStatus::Ok
        );
        assert_eq!(curve, g2_theory(gamma, omega, 0.26, &tau).unwrap());

        let mut bound = 0u64;
        assert_eq!(
            ft_lower_bound_atoms(0.443, 0.985, 200, &mut bound),
            FtStatus::Ok
        );
        assert_eq!(bound, 108);
        assert_eq!(bound, lower_bound_atoms(0.443, 0.985, 200).unwrap());

        let (mut d0, mut beta) = (0.0, 0.0);
        assert_eq!(ft_estimate_beta(1.2, 155, &mut d0, &mut beta), FtStatus::Ok);
        assert_eq!((d0, beta), estimate_beta(1.2, 155).unwrap());
        assert_eq!(d0, 1.2 / 155.0);
        assert_eq!(beta, d0 / 2.0);

        assert_eq!(ft_cs_rabi_from_saturation(1.0, &mut value), FtStatus::Ok);
        assert_eq!(value, AtomSpec::cs_d2().rabi_from_saturation(1.0).unwrap());
        assert_eq!(ft_cs_scattering_rate(1.0, 0.0, &mut value), FtStatus::Ok);
        assert_eq!(value, AtomSpec::cs_d2().scattering_rate(1.0, 0.0).unwrap());
    }
}

#[test]
fn error_paths_set_status_and_message() {
    unsafe {
        // null out pointer
        assert_eq!(
            ft_mode_solve(155e-9, 852e-9, 0.0, 1.0, ptr::null_mut()),
            FtStatus::NullPointer
        );

        // invalid geometry
        let mut handle: *mut FtMode = ptr::null_mut();
        assert_eq!(
            ft_mode_solve(-1.0, 852e-9, 0.0, 1.0, &mut handle),
            FtStatus::InvalidInput
        );
        assert!(handle.is_null());
        assert!(last_error().contains("positive"));

        // multimode fiber has no single fundamental solution here
        assert_eq!(
            ft_mode_solve(2000e-9, 852e-9, 0.0, 1.0, &mut handle),
            FtStatus::Solver
        );
        assert!(last_error().contains("multimode"));

        // null handles are reported, not dereferenced
        let mut value = 0.0;
        assert_eq!(ft_mode_n_eff(ptr::null(), &mut value), FtStatus::NullPointer);
        let mut coupling: *mut FtCoupling = ptr::null_mut();
        assert_eq!(
            ft_coupling_calibrate(ptr::null(), 1.0, 671e-9, 0.006, &mut coupling),
            FtStatus::NullPointer
        );
        assert_eq!(
            ft_coupling_beta_at(ptr::null(), 190e-9, &mut value),
            FtStatus::NullPointer
        );

        // bad calibration anchor
        let mode = solve_ffi();
        assert_eq!(
            ft_coupling_calibrate(mode, 1.0, 671e-9, 2.0, &mut coupling),
            FtStatus::InvalidInput
        );
        assert!(coupling.is_null());
        ft_mode_free(mode);

        // frees ignore null
        ft_mode_free(ptr::null_mut());
        ft_coupling_free(ptr::null_mut());
    }
}

#[test]
fn last_error_reports_and_truncates_lengths() {
    unsafe {
        let mut handle: *mut FtMode = ptr::null_mut();
        assert_eq!(
            ft_mode_solve(-1.0, 852e-9, 0.0, 1.0, &mut handle),
            FtStatus::InvalidInput
        );
        // length query without a buffer
        let needed = ft_last_error(ptr::null_mut(), 0);
        assert!(needed > 1);
        // truncated copy still arrives NUL terminated
        let mut small = [0x7fu8; 4];
        assert_eq!(ft_last_error(small.as_mut_ptr().cast(), small.len()), needed);
        assert_eq!(small[3], 0);
        let full = last_error();
        assert_eq!(full.len() + 1, needed);
        assert!(full.starts_with(CStr::from_bytes_until_nul(&small).unwrap().to_str().unwrap()));
    }
}
