//! Synthetic optical-depth measurements: two-component trap-decay traces
//! and Lorentzian transmission spectra, with probe shot noise.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Two-component decay of the on-resonance optical depth,
/// OD(t) = 2 β₁ N₁ e^{−t/τ₁} + 2 β₂ N₂ e^{−t/τ₂}.
///
/// Component 1 is the strongly coupled population, component 2 the weakly
/// coupled one; an absent component has N = 0 (its τ is then irrelevant
/// but must still be positive).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OdDecayParams {
    pub n1: f64,
    pub tau1: f64,
    pub n2: f64,
    pub tau2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl OdDecayParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n1", self.n1),
            ("n2", self.n2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Input(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn od_at(&self, t: f64) -> f64 {
        2.0 * self.beta1 * self.n1 * (-t / self.tau1).exp()
            + 2.0 * self.beta2 * self.n2 * (-t / self.tau2).exp()
    }
}

/// Noise applied to synthetic OD data.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum OdNoise {
    /// Exact closed-form values.
    None,
    /// Shot noise of a weak probe: the detected photon number per point is
    /// Poisson with mean `counts_per_point * e^{−OD}`, and the measured OD
    /// is −ln(max(K, 1)/counts_per_point).
    ProbeShot { counts_per_point: f64 },
}

/// One measured decay trace.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OdTrace {
    /// Hold times (s).
    pub times: Vec<f64>,
    /// Measured optical depth at each hold time; non-negative up to noise.
    pub od: Vec<f64>,
}

fn apply_noise<R: Rng + ?Sized>(od_true: f64, noise: OdNoise, rng: &mut R) -> Result<f64> {
    match noise {
        OdNoise::None => Ok(od_true),
        OdNoise::ProbeShot { counts_per_point } => {
            if !(counts_per_point >= 1.0) {
                return Err(Error::Input(format!(
                    "counts_per_point must be at least 1, got {counts_per_point}"
                )));
            }
            let mean = counts_per_point * (-od_true).exp();
            let k = if mean > 0.0 {
                Poisson::new(mean).expect("positive mean").sample(rng)
            } else {
                0.0
            };
            Ok(-(k.max(1.0) / counts_per_point).ln())
        }
    }
}

/// Generate a decay trace at the given hold times.
pub fn simulate_od_decay<R: Rng + ?Sized>(
    params: &OdDecayParams,
    times: &[f64],
    noise: OdNoise,
    rng: &mut R,
) -> Result<OdTrace> {
    params.validate()?;
    if times.is_empty() {
        return Err(Error::Input("need at least one hold time".into()));
    }
    if times.windows(2).any(|p| p[1] <= p[0]) || times[0] < 0.0 {
        return Err(Error::Input(
            "hold times must be non-negative and strictly increasing".into(),
        ));
    }
    let od = times
        .iter()
        .map(|&t| apply_noise(params.od_at(t), noise, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(OdTrace {
        times: times.to_vec(),
        od,
    })
}

/// Lorentzian transmission spectrum T(Δ) = exp(−OD_pk / (1 + (2(Δ−c)/Γ)²)).
/// Detunings, center `c`, and linewidth `gamma_fwhm` share any one
/// frequency unit.
pub fn lorentzian_transmission(
    od_peak: f64,
    center: f64,
    gamma_fwhm: f64,
    detunings: &[f64],
) -> Result<Vec<f64>> {
    if !(od_peak >= 0.0) || !od_peak.is_finite() {
        return Err(Error::Input(format!(
            "od_peak must be non-negative, got {od_peak}"
        )));
    }
    if !(gamma_fwhm > 0.0) {
        return Err(Error::Input(format!(
            "linewidth must be positive, got {gamma_fwhm}"
        )));
    }
    Ok(detunings
        .iter()
        .map(|&d| {
            let x = 2.0 * (d - center) / gamma_fwhm;
            (-od_peak / (1.0 + x * x)).exp()
        })
        .collect())
}

/// Generate a transmission spectrum with probe shot noise; returns the
/// measured transmission at each detuning.
pub fn simulate_od_spectrum<R: Rng + ?Sized>(
    od_peak: f64,
    center: f64,
    gamma_fwhm: f64,
    detunings: &[f64],
    noise: OdNoise,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if detunings.is_empty() {
        return Err(Error::Input("need at least one detuning".into()));
    }
    let clean = lorentzian_transmission(od_peak, center, gamma_fwhm, detunings)?;
    clean
        .iter()
        .map(|&t| {
            let od = -t.ln();
            apply_noise(od, noise, rng).map(|o| (-o).exp())
        })
        .collect()
}
