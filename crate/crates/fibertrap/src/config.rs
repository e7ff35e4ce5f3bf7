//! Versioned TOML run configuration. Field names carry their units; values
//! convert to SI on the way into the physics types.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibermode::{silica_index, FiberSpec};
use crate::holography::{FocalGeometry, HologramProblem};
use crate::simkit::ExperimentConfig;
use crate::trapfield::{SurfaceReflection, TweezerBeamSpec};
use crate::units::{ATOMIC_UNIT_POLARIZABILITY, PLANCK};

/// Root of a run configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Config format version; this crate reads version 1.
    pub version: u32,
    /// Base RNG seed for everything stochastic.
    pub seed: u64,
    pub fiber: FiberSection,
    pub tweezer: TweezerSection,
    pub experiment: ExperimentSection,
    pub analysis: AnalysisSection,
    pub hologram: HologramSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: 1,
            seed: 1,
            fiber: FiberSection::default(),
            tweezer: TweezerSection::default(),
            experiment: ExperimentSection::default(),
            analysis: AnalysisSection::default(),
            hologram: HologramSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSection {
    pub radius_nm: f64,
    pub wavelength_nm: f64,
    /// Core index; derived from the silica dispersion curve when omitted.
    pub index_core: Option<f64>,
    pub index_clad: f64,
}

impl Default for FiberSection {
    fn default() -> Self {
        FiberSection {
            radius_nm: 155.0,
            wavelength_nm: 852.0,
            index_core: None,
            index_clad: 1.0,
        }
    }
}

impl FiberSection {
    pub fn to_spec(&self) -> Result<FiberSpec> {
        let wavelength = self.wavelength_nm * 1e-9;
        let index_core = match self.index_core {
            Some(n) => n,
            None => silica_index(wavelength),
        };
        let spec = FiberSpec {
            radius: self.radius_nm * 1e-9,
            wavelength,
            index_core,
            index_clad: self.index_clad,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TweezerSection {
    pub wavelength_nm: f64,
    pub waist_um: f64,
    pub power_mw: f64,
    pub polarizability_au: f64,
    pub focus_offset_um: f64,
    pub reflection_amplitude: f64,
    pub reflection_phase_rad: f64,
    /// Surface van der Waals coefficient, h × (value) kHz·µm³.
    pub c3_khz_um3: f64,
    /// Minimum barrier depth (µK) for a minimum to count as a trap site.
    pub depth_threshold_uk: f64,
    pub grid_min_nm: f64,
    pub grid_max_nm: f64,
    pub grid_step_nm: f64,
}

impl Default for TweezerSection {
    fn default() -> Self {
        TweezerSection {
            wavelength_nm: 935.0,
            waist_um: 1.0,
            power_mw: 1.5,
            polarizability_au: 1160.0,
            focus_offset_um: 2.589230,
            reflection_amplitude: 0.30,
            reflection_phase_rad: 3.834911,
            c3_khz_um3: 2.4,
            depth_threshold_uk: 0.0,
            grid_min_nm: 5.0,
            grid_max_nm: 3000.0,
            grid_step_nm: 1.0,
        }
    }
}

impl TweezerSection {
    pub fn to_beam(&self) -> Result<TweezerBeamSpec> {
        let beam = TweezerBeamSpec {
            wavelength: self.wavelength_nm * 1e-9,
            waist: self.waist_um * 1e-6,
            power: self.power_mw * 1e-3,
            polarizability: self.polarizability_au * ATOMIC_UNIT_POLARIZABILITY,
            focus_offset: self.focus_offset_um * 1e-6,
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn to_reflection(&self) -> Result<SurfaceReflection> {
        let refl = SurfaceReflection {
            amplitude: self.reflection_amplitude,
            phase: self.reflection_phase_rad,
        };
        refl.validate()?;
        Ok(refl)
    }

    /// C₃ in J·m³.
    pub fn c3_si(&self) -> f64 {
        self.c3_khz_um3 * PLANCK * 1e3 * 1e-18
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.grid_step_nm > 0.0) || !(self.grid_min_nm > 0.0) {
            return Err(Error::Config(
                "grid bounds and step must be positive".into(),
            ));
        }
        if self.grid_max_nm <= self.grid_min_nm {
            return Err(Error::Config("grid_max_nm must exceed grid_min_nm".into()));
        }
        let n = ((self.grid_max_nm - self.grid_min_nm) / self.grid_step_nm).floor() as usize + 1;
        Ok((0..n)
            .map(|i| (self.grid_min_nm + i as f64 * self.grid_step_nm) * 1e-9)
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub n_sites: usize,
    pub pitch_um: f64,
    pub fill_probability: f64,
    pub scan_speed_mm_s: f64,
    pub spot_waist_um: f64,
    pub saturation: f64,
    pub detection_efficiency: f64,
    pub background_rate_hz: f64,
    pub trap_lifetime_ms: f64,
    pub interaction_loss_constant: f64,
    pub time_resolution_ns: f64,
    pub bright_onset_rate_hz: f64,
    pub companion_ratio: f64,
    pub n_scans: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        ExperimentSection {
            n_sites: d.n_sites,
            pitch_um: d.pitch * 1e6,
            fill_probability: d.fill_probability,
            scan_speed_mm_s: d.scan_speed * 1e3,
            spot_waist_um: d.spot_waist * 1e6,
            saturation: d.saturation,
            detection_efficiency: d.detection_efficiency,
            background_rate_hz: d.background_rate,
            trap_lifetime_ms: d.trap_lifetime * 1e3,
            interaction_loss_constant: d.interaction_loss_constant,
            time_resolution_ns: d.time_resolution * 1e9,
            bright_onset_rate_hz: d.bright_onset_rate,
            companion_ratio: d.companion_ratio,
            n_scans: 2000,
        }
    }
}

impl ExperimentSection {
    pub fn to_config(&self, seed: u64) -> Result<ExperimentConfig> {
        let config = ExperimentConfig {
            n_sites: self.n_sites,
            pitch: self.pitch_um * 1e-6,
            fill_probability: self.fill_probability,
            scan_speed: self.scan_speed_mm_s * 1e-3,
            spot_waist: self.spot_waist_um * 1e-6,
            saturation: self.saturation,
            detection_efficiency: self.detection_efficiency,
            background_rate: self.background_rate_hz,
            trap_lifetime: self.trap_lifetime_ms * 1e-3,
            interaction_loss_constant: self.interaction_loss_constant,
            time_resolution: self.time_resolution_ns * 1e-9,
            bright_onset_rate: self.bright_onset_rate_hz,
            companion_ratio: self.companion_ratio,
            seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub bin_ns: f64,
    pub window_ns: f64,
    pub ref_window_ns: [f64; 2],
    pub min_ref_counts: u64,
    pub g2_zero_halfwidth_ns: f64,
    /// Background mean per window for the mixture fit; derived from the
    /// experiment section when omitted.
    pub mu_background: Option<f64>,
    pub f_test_alpha: f64,
    /// Anchor for calibrating the evanescent coupling model: distance (nm)
    /// and single-atom β at that distance.
    pub coupling_anchor_nm: f64,
    pub coupling_anchor_beta: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            bin_ns: 0.8,
            window_ns: 800.0,
            ref_window_ns: [500.0, 800.0],
            min_ref_counts: 100,
            g2_zero_halfwidth_ns: 4.0,
            mu_background: None,
            f_test_alpha: 0.01,
            coupling_anchor_nm: 671.0,
            coupling_anchor_beta: 0.006,
        }
    }
}

impl AnalysisSection {
    pub fn to_options(&self) -> crate::inference::AnalysisOptions {
        crate::inference::AnalysisOptions {
            bin_width: self.bin_ns * 1e-9,
            window: self.window_ns * 1e-9,
            reference_window: (self.ref_window_ns[0] * 1e-9, self.ref_window_ns[1] * 1e-9),
            min_reference_counts: self.min_ref_counts,
            zero_half_width: self.g2_zero_halfwidth_ns * 1e-9,
            mu_background: self.mu_background,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HologramSection {
    pub grid_size: usize,
    pub n_spots: usize,
    pub spot_pitch_um: f64,
    pub iterations: usize,
    pub tolerance: f64,
    pub zero_non_targets: bool,
    pub wavelength_nm: f64,
    pub focal_length_mm: f64,
    pub slm_pitch_um: f64,
}

impl Default for HologramSection {
    fn default() -> Self {
        HologramSection {
            grid_size: 512,
            n_spots: 200,
            spot_pitch_um: 5.0,
            iterations: 100,
            tolerance: 0.01,
            zero_non_targets: false,
            wavelength_nm: 935.0,
            focal_length_mm: 10.9519,
            slm_pitch_um: 8.0,
        }
    }
}

impl HologramSection {
    pub fn geometry(&self) -> FocalGeometry {
        FocalGeometry {
            wavelength: self.wavelength_nm * 1e-9,
            focal_length: self.focal_length_mm * 1e-3,
            slm_pitch: self.slm_pitch_um * 1e-6,
        }
    }

    pub fn to_problem(&self, seed: u64) -> Result<HologramProblem> {
        let geometry = self.geometry();
        let targets =
            geometry.linear_array_targets(self.grid_size, self.n_spots, self.spot_pitch_um * 1e-6)?;
        let problem = HologramProblem {
            grid_size: self.grid_size,
            targets,
            iterations: self.iterations,
            tolerance: self.tolerance,
            zero_non_targets: self.zero_non_targets,
            seed,
        };
        problem.validate()?;
        Ok(problem)
    }
}

impl RunConfig {
    /// Parse and validate a TOML configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::Config(format!(
                "unsupported config version {}; this build reads version 1",
                self.version
            )));
        }
        self.fiber.to_spec()?;
        self.tweezer.to_beam()?;
        self.tweezer.to_reflection()?;
        self.tweezer.grid()?;
        self.experiment.to_config(self.seed)?;
        if !(self.analysis.f_test_alpha > 0.0 && self.analysis.f_test_alpha < 1.0) {
            return Err(Error::Config("f_test_alpha must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.analysis.coupling_anchor_beta)
            || self.analysis.coupling_anchor_beta == 0.0
            || self.analysis.coupling_anchor_beta == 1.0
        {
            return Err(Error::Config(
                "coupling_anchor_beta must lie strictly between 0 and 1".into(),
            ));
        }
        if !(self.analysis.coupling_anchor_nm > 0.0) {
            return Err(Error::Config("coupling_anchor_nm must be positive".into()));
        }
        self.hologram.to_problem(self.seed)?;
        Ok(())
    }
}
