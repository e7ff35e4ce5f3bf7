//! HE11 mode of a vacuum-clad step-index nanofiber: exact dispersion relation
//! solved by scan-and-bisect, plus the azimuthally averaged evanescent
//! intensity profile used by the trap and coupling models.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{
    bessel_j0, bessel_j1, bessel_j1_prime, bessel_k0, bessel_k1, bessel_k1_prime, bessel_k2,
};

/// Single-mode cutoff: V below the first zero of J0 keeps only HE11.
pub const SINGLE_MODE_V_LIMIT: f64 = 2.405;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec {
    /// Core radius a (m).
    pub radius: f64,
    /// Free-space wavelength (m).
    pub wavelength: f64,
    /// Core index n1.
    pub index_core: f64,
    /// Cladding index n2 (vacuum = 1).
    pub index_clad: f64,
}

/// Malitson's fused-silica Sellmeier equation; wavelength in m.
/// Used as the default core index when a config does not pin one.
pub fn silica_index(wavelength: f64) -> f64 {
    let l2 = (wavelength * 1e6).powi(2);
    (1.0 + 0.6961663 * l2 / (l2 - 0.0684043_f64.powi(2))
        + 0.4079426 * l2 / (l2 - 0.1162414_f64.powi(2))
        + 0.8974794 * l2 / (l2 - 9.896161_f64.powi(2)))
    .sqrt()
}

impl FiberSpec {
    pub fn new(radius: f64, wavelength: f64, index_core: f64) -> Self {
        FiberSpec {
            radius,
            wavelength,
            index_core,
            index_clad: 1.0,
        }
    }

    /// 310 nm waist probed at 852 nm, silica core in vacuum.
    pub fn nanofiber_default() -> Self {
        FiberSpec::new(155e-9, 852e-9, silica_index(852e-9))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !(self.wavelength > 0.0) {
            return Err(Error::Input("fiber radius and wavelength must be positive".into()));
        }
        if !(self.index_core > self.index_clad) || !(self.index_clad >= 1.0) {
            return Err(Error::Input(format!(
                "need index_core > index_clad >= 1, got ({}, {})",
                self.index_core, self.index_clad
            )));
        }
        Ok(())
    }

    /// V = (2πa/λ)·sqrt(n1² − n2²).
    pub fn v_number(&self) -> f64 {
        2.0 * PI * self.radius / self.wavelength
            * (self.index_core.powi(2) - self.index_clad.powi(2)).sqrt()
    }

    pub fn is_single_mode(&self) -> bool {
        self.v_number() < SINGLE_MODE_V_LIMIT
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOpts {
    /// Absolute bisection tolerance on the core parameter u.
    pub tolerance: f64,
    /// Number of scan points bracketing the fundamental root.
    pub scan_points: usize,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts {
            tolerance: 1e-13,
            scan_points: 4000,
        }
    }
}

/// Solved HE11 mode. Immutable; all fields are plain numbers so the value is
/// freely copyable across threads and the FFI boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedMode {
    pub fiber: FiberSpec,
    pub n_eff: f64,
    /// Propagation constant β = k0·n_eff (rad/m).
    pub beta_prop: f64,
    /// Evanescent decay constant q = k0·sqrt(n_eff² − n2²) (1/m).
    pub q_decay: f64,
    pub v_number: f64,
    /// Core parameter u = a·sqrt(k²n1² − β²).
    pub u: f64,
    /// Cladding parameter w = a·sqrt(β² − k²n2²); q = w/a.
    pub w: f64,
    /// Dispersion residual at the returned root.
    pub residual: f64,
    /// HE11 field-shape parameter s entering the cladding profile.
    s_shape: f64,
    /// Intensity at the fiber surface, before normalization.
    surface_intensity: f64,
}

/// The HE11 (l = 1) characteristic equation written as lhs − rhs, with the
/// hybrid-mode square root resolved onto the HE branch. Zero at the mode.
fn dispersion(u: f64, v: f64, n1: f64, n2: f64) -> f64 {
    let w = (v * v - u * u).sqrt();
    let n_eff_sq = n1 * n1 - (u / v).powi(2) * (n1 * n1 - n2 * n2);
    let a = bessel_k1_prime(w) / (w * bessel_k1(w));
    let lhs = bessel_j0(u) / (u * bessel_j1(u));
    let mean = (n1 * n1 + n2 * n2) / (2.0 * n1 * n1);
    let half_diff = (n1 * n1 - n2 * n2) / (2.0 * n1 * n1);
    let rhs = -mean * a + 1.0 / (u * u)
        - ((half_diff * a).powi(2)
            + n_eff_sq / (n1 * n1) * (1.0 / (w * w) + 1.0 / (u * u)).powi(2))
        .sqrt();
    lhs - rhs
}

/// Solve the fundamental HE11 mode. Errors if the fiber is multimode or the
/// bracket scan finds no root.
pub fn solve_he11(spec: &FiberSpec, opts: &SolverOpts) -> Result<GuidedMode> {
    spec.validate()?;
    if !(opts.tolerance > 0.0) {
        return Err(Error::Input("solver tolerance must be positive".into()));
    }
    let v = spec.v_number();
    if v >= SINGLE_MODE_V_LIMIT {
        return Err(Error::Solver(format!(
            "multimode fiber: V = {v:.3} >= {SINGLE_MODE_V_LIMIT}"
        )));
    }
    let (n1, n2) = (spec.index_core, spec.index_clad);

    // The fundamental root is the largest u below V; scan downward from the
    // top of the bracket and bisect the first sign change.
    let top = v * (1.0 - 1e-9);
    let n_scan = opts.scan_points.max(16);
    let step = (top - 1e-9 * v) / n_scan as f64;
    let mut hi = top;
    let mut f_hi = dispersion(hi, v, n1, n2);
    let mut bracket = None;
    for i in 1..=n_scan {
        let lo = top - step * i as f64;
        let f_lo = dispersion(lo, v, n1, n2);
        if f_lo.is_finite() && f_hi.is_finite() && f_lo.signum() != f_hi.signum() {
            bracket = Some((lo, hi));
            break;
        }
        hi = lo;
        f_hi = f_lo;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::Solver(format!(
            "no HE11 root bracketed for V = {v:.4} over {n_scan} scan points"
        ))
    })?;
    let mut f_lo = dispersion(lo, v, n1, n2);
    while hi - lo > opts.tolerance {
        let mid = 0.5 * (lo + hi);
        let f_mid = dispersion(mid, v, n1, n2);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let w = (v * v - u * u).sqrt();
    let n_eff = (n1 * n1 - (u / v).powi(2) * (n1 * n1 - n2 * n2)).sqrt();
    let k0 = 2.0 * PI / spec.wavelength;

    // Shape parameter of the hybrid mode, feeding the cladding profile.
    let s_shape = (1.0 / (u * u) + 1.0 / (w * w))
        / (bessel_j1_prime(u) / (u * bessel_j1(u)) + bessel_k1_prime(w) / (w * bessel_k1(w)));

    let mut mode = GuidedMode {
        fiber: *spec,
        n_eff,
        beta_prop: k0 * n_eff,
        q_decay: w / spec.radius,
        v_number: v,
        u,
        w,
        residual: dispersion(u, v, n1, n2).abs(),
        s_shape,
        surface_intensity: 1.0,
    };
    mode.surface_intensity = mode.cladding_intensity(0.0);
    Ok(mode)
}

impl GuidedMode {
    /// Azimuthally averaged cladding intensity at distance d from the
    /// surface, in the mode's own (unnormalized) units.
    fn cladding_intensity(&self, d: f64) -> f64 {
        let r = self.fiber.radius + d;
        let x = self.q_decay * r;
        let s = self.s_shape;
        let prefactor = (self.beta_prop / self.q_decay).powi(2) / 2.0;
        prefactor
            * ((1.0 - s).powi(2) * bessel_k0(x).powi(2)
                + (1.0 + s).powi(2) * bessel_k2(x).powi(2))
            + bessel_k1(x).powi(2)
    }

    /// Normalized evanescent intensity: 1 at the surface, monotone decaying,
    /// asymptotically ∝ exp(−2qd)/d.
    pub fn evanescent_intensity(&self, d: f64) -> Result<f64> {
        if d < 0.0 {
            return Err(Error::Domain(format!("distance must be >= 0, got {d}")));
        }
        Ok(self.cladding_intensity(d) / self.surface_intensity)
    }

    /// Sampled (d, intensity) profile for export.
    pub fn sample_profile(&self, d_max: f64, n: usize) -> Result<Vec<(f64, f64)>> {
        if n < 2 || !(d_max > 0.0) {
            return Err(Error::Input("profile sampling needs n >= 2, d_max > 0".into()));
        }
        (0..n)
            .map(|i| {
                let d = d_max * i as f64 / (n - 1) as f64;
                Ok((d, self.evanescent_intensity(d)?))
            })
            .collect()
    }
}
