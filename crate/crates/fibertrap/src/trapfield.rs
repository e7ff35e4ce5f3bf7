//! Scalar standing-wave tweezer trap above the fiber surface: interference
//! of the incident focused beam with its surface reflection, dipole and van
//! der Waals potentials, and trap-site extraction.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::{EPSILON_0, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TweezerBeamSpec {
    /// Trap wavelength (m); 935 nm magic wavelength by default.
    pub wavelength: f64,
    /// Focused 1/e² waist radius (m).
    pub waist: f64,
    /// Power per tweezer spot (W).
    pub power: f64,
    /// Ground-state polarizability at the trap wavelength (SI, C²m²/J).
    pub polarizability: f64,
    /// Focus position above the surface (m). Calibrated, not measured: the
    /// Gouy-phase curvature it introduces is what stretches the fringe
    /// spacing beyond λ/2.
    pub focus_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceReflection {
    /// |r| of the effective surface reflection, in [0, 1].
    pub amplitude: f64,
    /// Reflection phase φ_r (rad).
    pub phase: f64,
}

impl TweezerBeamSpec {
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    /// Peak intensity of the focused Gaussian, 2P/(πw0²).
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (PI * self.waist * self.waist)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.waist > 0.0) || !(self.wavelength > 0.0) || !(self.power >= 0.0) {
            return Err(Error::Input(
                "tweezer needs waist > 0, wavelength > 0, power >= 0".into(),
            ));
        }
        Ok(())
    }
}

impl SurfaceReflection {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(Error::Input(format!(
                "reflection amplitude must be in [0, 1], got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Standing-wave intensity (W/m²) at height d above the surface: incident
/// focused beam plus its reflection from the surface,
/// I(d) = I_pk·[A_i² + r²A_r² + 2·r·A_i·A_r·cos Φ] with Gouy-curved phase
/// Φ = 2kd − [atan((z_f+d)/z_R) − atan((z_f−d)/z_R)] + φ_r.
pub fn standing_wave_intensity(beam: &TweezerBeamSpec, refl: &SurfaceReflection, d: f64) -> f64 {
    let zr = beam.rayleigh_range();
    let zf = beam.focus_offset;
    let k = 2.0 * PI / beam.wavelength;
    let a_i = 1.0 / (1.0 + ((d - zf) / zr).powi(2)).sqrt();
    let a_r = 1.0 / (1.0 + ((d + zf) / zr).powi(2)).sqrt();
    let phi = 2.0 * k * d - (((zf + d) / zr).atan() - ((zf - d) / zr).atan()) + refl.phase;
    let r = refl.amplitude;
    beam.peak_intensity() * (a_i * a_i + r * r * a_r * a_r + 2.0 * r * a_i * a_r * phi.cos())
}

/// Optical dipole potential U = −α·I/(2ε₀c); negative (trapping) for
/// red-detuned light with positive polarizability.
pub fn dipole_potential(intensity: f64, polarizability: f64) -> f64 {
    -polarizability * intensity / (2.0 * EPSILON_0 * SPEED_OF_LIGHT)
}

/// Van der Waals surface potential −C₃/d³; diverges at the surface.
pub fn vdw_potential(c3: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("vdW distance must be > 0, got {d}")));
    }
    Ok(-c3 / (d * d * d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    /// Distances from the surface (m), strictly increasing.
    pub grid: Vec<f64>,
    pub u_optical: Vec<f64>,
    pub u_vdw: Vec<f64>,
    pub u_total: Vec<f64>,
    pub c3: f64,
}

/// Sample the total potential on `grid` (distances from the surface, m).
pub fn compute_profile(
    beam: &TweezerBeamSpec,
    refl: &SurfaceReflection,
    c3: f64,
    grid: &[f64],
) -> Result<PotentialProfile> {
    beam.validate()?;
    refl.validate()?;
    if grid.is_empty() {
        return Err(Error::Input("empty potential grid".into()));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Input("potential grid must be strictly increasing".into()));
    }
    let mut u_optical = Vec::with_capacity(grid.len());
    let mut u_vdw = Vec::with_capacity(grid.len());
    let mut u_total = Vec::with_capacity(grid.len());
    for &d in grid {
        let uo = dipole_potential(standing_wave_intensity(beam, refl, d), beam.polarizability);
        let uv = vdw_potential(c3, d)?;
        u_optical.push(uo);
        u_vdw.push(uv);
        u_total.push(uo + uv);
    }
    Ok(PotentialProfile {
        grid: grid.to_vec(),
        u_optical,
        u_vdw,
        u_total,
        c3,
    })
}

/// Default sampling grid: 5 nm to 3 um in 1 nm steps.
pub fn default_grid() -> Vec<f64> {
    (5..=3000).map(|nm| nm as f64 * 1e-9).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSite {
    /// Distance of the potential minimum from the surface (m).
    pub position: f64,
    /// Escape barrier: min(toward surface, away from surface) − U(min), J.
    pub depth: f64,
    /// 1-based index after sorting by position.
    pub label: usize,
}

/// Locate stable trap sites: local minima of the total potential whose
/// escape barrier (the lower of the two adjacent saddles) exceeds
/// `depth_threshold`. Where no saddle exists on a side, the grid edge value
/// caps the barrier; with vdW the surface-side edge is deeply negative, so
/// minima without an interior saddle drain into the surface and drop out.
pub fn find_trap_sites(profile: &PotentialProfile, depth_threshold: f64) -> Result<Vec<TrapSite>> {
    let u = &profile.u_total;
    let n = u.len();
    if n < 3 {
        return Err(Error::Input("potential grid too short for site search".into()));
    }
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..n - 1 {
        if u[i] < u[i - 1] && u[i] <= u[i + 1] {
            minima.push(i);
        } else if u[i] > u[i - 1] && u[i] >= u[i + 1] {
            maxima.push(i);
        }
    }
    let mut sites = Vec::new();
    for &mi in &minima {
        let lb = maxima.iter().rev().find(|&&m| m < mi).map_or(u[0], |&l| u[l]);
        let rb = maxima.iter().find(|&&m| m > mi).map_or(u[n - 1], |&r| u[r]);
        let depth = (lb.min(rb) - u[mi]).max(0.0);
        if depth > depth_threshold {
            sites.push(TrapSite {
                position: profile.grid[mi],
                depth,
                label: 0,
            });
        }
    }
    sites.sort_by(|a, b| a.position.total_cmp(&b.position));
    for (i, s) in sites.iter_mut().enumerate() {
        s.label = i + 1;
    }
    Ok(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{joule_to_microkelvin, ATOMIC_UNIT_POLARIZABILITY, PLANCK};

    // Calibrated so the first two intensity maxima sit at 190 and 671 nm.
    pub fn calibrated_beam(power: f64) -> TweezerBeamSpec {
        TweezerBeamSpec {
            wavelength: 935e-9,
            waist: 1.0e-6,
            power,
            polarizability: 1160.0 * ATOMIC_UNIT_POLARIZABILITY,
            focus_offset: 2.589230e-6,
        }
    }

    pub fn calibrated_reflection() -> SurfaceReflection {
        SurfaceReflection {
            amplitude: 0.30,
            phase: 3.834911,
        }
    }

    fn c3_default() -> f64 {
        2.4 * PLANCK * 1e3 * 1e-18
    }

    fn intensity_maxima(beam: &TweezerBeamSpec, refl: &SurfaceReflection) -> Vec<f64> {
        let grid = default_grid();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&d| standing_wave_intensity(beam, refl, d))
            .collect();
        (1..grid.len() - 1)
            .filter(|&i| vals[i] > vals[i - 1] && vals[i] >= vals[i + 1])
            .map(|i| grid[i])
            .collect()
    }

    #[test]
    fn calibrated_maxima_positions() {
        let maxima = intensity_maxima(&calibrated_beam(1.5e-3), &calibrated_reflection());
        let want = [190e-9, 671e-9, 1152e-9, 1633e-9];
        for (got, want) in maxima.iter().zip(want) {
            assert!(
                (got - want).abs() < 1.5e-9,
                "maximum at {} nm, want {} nm",
                got * 1e9,
                want * 1e9
            );
        }
    }

    #[test]
    fn fringe_spacing_far_from_focus_approaches_half_wavelength() {
        // with the focus at the surface and no curvature asymmetry the
        // period is λ/2 exactly far away
        let beam = TweezerBeamSpec {
            focus_offset: 0.0,
            ..calibrated_beam(1.5e-3)
        };
        let refl = SurfaceReflection { amplitude: 0.3, phase: 0.0 };
        let grid: Vec<f64> = (300_000..=400_000).map(|nm| nm as f64 * 1e-10).collect();
        let vals: Vec<f64> = grid.iter().map(|&d| standing_wave_intensity(&beam, &refl, d)).collect();
        let maxima: Vec<f64> = (1..grid.len() - 1)
            .filter(|&i| vals[i] > vals[i - 1] && vals[i] >= vals[i + 1])
            .map(|i| grid[i])
            .collect();
        for pair in maxima.windows(2) {
            let spacing = pair[1] - pair[0];
            assert!((spacing - 467.5e-9).abs() < 1e-9, "spacing {}", spacing * 1e9);
        }
    }

    #[test]
    fn no_reflection_means_no_fringes() {
        let beam = calibrated_beam(1.5e-3);
        let refl = SurfaceReflection { amplitude: 0.0, phase: 1.0 };
        // pure Gaussian envelope: single maximum at the focus
        let maxima = intensity_maxima(&beam, &refl);
        assert!(maxima.len() <= 1);
        // and the envelope value matches the focused-Gaussian form
        let d = 0.7e-6;
        let zr = beam.rayleigh_range();
        let want = beam.peak_intensity() / (1.0 + ((d - beam.focus_offset) / zr).powi(2));
        assert!((standing_wave_intensity(&beam, &refl, d) / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dipole_potential_linearity_and_sign() {
        assert_eq!(dipole_potential(0.0, 5e-39), 0.0);
        let u1 = dipole_potential(1e7, 5e-39);
        let u2 = dipole_potential(2e7, 5e-39);
        assert!(u1 < 0.0);
        assert!((u2 / u1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dipole_depth_scale_hand_check() {
        // single-point closed form at the second fringe maximum
        let beam = calibrated_beam(1.5e-3);
        let refl = calibrated_reflection();
        let i_max = standing_wave_intensity(&beam, &refl, 671e-9);
        let u = dipole_potential(i_max, beam.polarizability);
        // hand evaluation: α I/(2 ε0 c), I = I_pk·(enhancement ≈ 1.45)
        let by_hand = -beam.polarizability * i_max / (2.0 * EPSILON_0 * SPEED_OF_LIGHT);
        assert!((u / by_hand - 1.0).abs() < 1e-12);
        // scale: a couple hundred μK deep at these parameters
        let uk = -joule_to_microkelvin(u);
        assert!(uk > 100.0 && uk < 500.0, "depth scale {uk} uK");
    }

    #[test]
    fn vdw_law() {
        let c3 = c3_default();
        let u1 = vdw_potential(c3, 100e-9).unwrap();
        let u2 = vdw_potential(c3, 200e-9).unwrap();
        assert!(u1 < 0.0);
        assert!((u2 / u1 - 0.125).abs() < 1e-12);
        assert_eq!(vdw_potential(0.0, 50e-9).unwrap(), 0.0);
        assert!(vdw_potential(c3, 0.0).is_err());
        assert!(vdw_potential(c3, -1e-9).is_err());
        // 2 um is effectively free space
        assert!(vdw_potential(c3, 2e-6).unwrap().abs() < 1e-30);
    }

    #[test]
    fn additivity_on_grid() {
        let p = compute_profile(
            &calibrated_beam(1.5e-3),
            &calibrated_reflection(),
            c3_default(),
            &default_grid(),
        )
        .unwrap();
        for i in 0..p.grid.len() {
            assert_eq!(p.u_total[i], p.u_optical[i] + p.u_vdw[i]);
        }
    }

    #[test]
    fn frozen_sites_at_reference_power() {
        let p = compute_profile(
            &calibrated_beam(1.5e-3),
            &calibrated_reflection(),
            c3_default(),
            &default_grid(),
        )
        .unwrap();
        let sites = find_trap_sites(&p, 0.0).unwrap();
        assert!(sites.len() >= 4);
        assert!((sites[0].position - 671e-9).abs() < 1.5e-9);
        assert!((joule_to_microkelvin(sites[0].depth) - 175.441821).abs() < 0.01);
        assert!((sites[1].position - 1152e-9).abs() < 1.5e-9);
        assert!((joule_to_microkelvin(sites[1].depth) - 173.020778).abs() < 0.01);
        // nothing stable inside 400 nm: the 190 nm fringe drains to the surface
        assert!(sites.iter().all(|s| s.position > 400e-9));
        assert_eq!(sites[0].label, 1);
    }

    #[test]
    fn first_site_threshold_behavior() {
        let refl = calibrated_reflection();
        let c3 = c3_default();
        let grid = default_grid();
        let inner_site = |power: f64| {
            let p = compute_profile(&calibrated_beam(power), &refl, c3, &grid).unwrap();
            find_trap_sites(&p, 0.0)
                .unwrap()
                .into_iter()
                .find(|s| s.position < 400e-9)
        };
        assert!(inner_site(1.51e-3).is_none());
        let s175 = inner_site(1.75e-3).expect("inner site should be stable at 1.75 mW");
        assert!(s175.position > 120e-9 && s175.position < 260e-9);
        // bisect the stabilization threshold; frozen at 1.6476 mW
        let (mut lo, mut hi) = (1.0e-3, 2.5e-3);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if inner_site(mid).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let p_star = 0.5 * (lo + hi);
        assert!((p_star - 1.6476e-3).abs() < 2e-6, "P* = {} mW", p_star * 1e3);
    }

    #[test]
    fn depths_nondecreasing_in_power() {
        let refl = calibrated_reflection();
        let c3 = c3_default();
        let grid = default_grid();
        let mut last_depth = 0.0;
        let mut last_count = 0;
        for pw in [0.27e-3, 0.56e-3, 0.99e-3, 1.51e-3, 1.75e-3, 2.0e-3] {
            let p = compute_profile(&calibrated_beam(pw), &refl, c3, &grid).unwrap();
            let sites = find_trap_sites(&p, 0.0).unwrap();
            let second = sites.iter().find(|s| (s.position - 671e-9).abs() < 30e-9).unwrap();
            assert!(second.depth >= last_depth);
            assert!(sites.len() >= last_count);
            last_depth = second.depth;
            last_count = sites.len();
        }
    }

    #[test]
    fn pure_standing_wave_far_sites_nearly_equal() {
        // no vdW: every fringe is a site; far-from-focus neighbors nearly equal
        let p = compute_profile(
            &calibrated_beam(1.5e-3),
            &calibrated_reflection(),
            0.0,
            &default_grid(),
        )
        .unwrap();
        let sites = find_trap_sites(&p, 0.0).unwrap();
        assert!(sites.len() >= 5);
        let d4 = sites[sites.len() - 2].depth;
        let d5 = sites[sites.len() - 1].depth;
        assert!((d4 / d5 - 1.0).abs() < 0.2);
        // the inner fringe survives without vdW
        assert!(sites[0].position < 400e-9);
    }

    #[test]
    fn rejects_bad_grids() {
        let beam = calibrated_beam(1.5e-3);
        let refl = calibrated_reflection();
        assert!(compute_profile(&beam, &refl, 0.0, &[]).is_err());
        assert!(compute_profile(&beam, &refl, 0.0, &[2e-9, 1e-9]).is_err());
    }
}
