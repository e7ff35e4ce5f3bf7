//! Atom-position → guided-mode coupling efficiency β(d), anchored to a
//! single calibration point. The guided rate follows the evanescent
//! intensity; the radiative rate stays at the free-space value, which is
//! second-order accurate in the β ≪ 1 regime this apparatus lives in.

use crate::error::{Error, Result};
use crate::fibermode::GuidedMode;

#[derive(Debug, Clone, Copy)]
pub struct CouplingModel {
    pub mode: GuidedMode,
    /// Free-space population decay rate Γ₀ (1/s).
    pub gamma0: f64,
    /// Dimensionless prefactor κ_c fixing Γ_g = κ_c·Γ₀·I(d).
    pub calibration: f64,
}

impl CouplingModel {
    pub fn new(mode: GuidedMode, gamma0: f64) -> Self {
        CouplingModel {
            mode,
            gamma0,
            calibration: 1.0,
        }
    }

    /// Fix κ_c so beta_at(anchor_d) = anchor_beta exactly.
    pub fn calibrate(mode: GuidedMode, gamma0: f64, anchor_d: f64, anchor_beta: f64) -> Result<Self> {
        if !(anchor_beta > 0.0 && anchor_beta < 1.0) {
            return Err(Error::Input(format!(
                "anchor beta must be in (0, 1), got {anchor_beta}"
            )));
        }
        let intensity = mode.evanescent_intensity(anchor_d)?;
        Ok(CouplingModel {
            mode,
            gamma0,
            calibration: anchor_beta / (1.0 - anchor_beta) / intensity,
        })
    }

    /// Guided emission rate Γ_g(d) = κ_c·Γ₀·I(d).
    pub fn guided_rate(&self, d: f64) -> Result<f64> {
        Ok(self.calibration * self.gamma0 * self.mode.evanescent_intensity(d)?)
    }

    /// Coupling efficiency β(d) = Γ_g/(Γ_g + Γ₀).
    pub fn beta_at(&self, d: f64) -> Result<f64> {
        let x = self.calibration * self.mode.evanescent_intensity(d)?;
        Ok(x / (x + 1.0))
    }

    /// Sampled (d, β) curve for export.
    pub fn sample_curve(&self, d_max: f64, n: usize) -> Result<Vec<(f64, f64)>> {
        if n < 2 || !(d_max > 0.0) {
            return Err(Error::Input("coupling curve needs n >= 2, d_max > 0".into()));
        }
        (0..n)
            .map(|i| {
                let d = d_max * i as f64 / (n - 1) as f64;
                Ok((d, self.beta_at(d)?))
            })
            .collect()
    }
}
