//! Weighted Gerchberg-Saxton phase retrieval for a uniform N-spot tweezer
//! array, plus the focal-plane geometry mapping SLM pixels to microns.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HologramProblem {
    /// Square grid side n (power of two).
    pub grid_size: usize,
    /// Focal-plane target pixels (x, y).
    pub targets: Vec<(usize, usize)>,
    pub iterations: usize,
    /// Uniformity goal; iteration stops early once reached.
    pub tolerance: f64,
    /// Constraint variant: true zeroes non-target focal amplitudes each
    /// round (higher efficiency, slower uniformity); false keeps them
    /// (standard WGS, the default).
    pub zero_non_targets: bool,
    /// Seed for the initial phase.
    pub seed: u64,
}

impl HologramProblem {
    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.grid_size;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Input(format!("grid size must be a power of two >= 2, got {n}")));
        }
        if self.iterations < 1 {
            return Err(Error::Input("need at least one iteration".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Input("no target spots".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(x, y) in &self.targets {
            if x >= n || y >= n {
                return Err(Error::Input(format!("target ({x}, {y}) off the {n}x{n} grid")));
            }
            if !seen.insert((x, y)) {
                return Err(Error::Input(format!("duplicate target ({x}, {y})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HologramSolution {
    pub grid_size: usize,
    /// Best-iterate SLM phase, row-major, in [0, 2π).
    pub phase: Vec<f64>,
    /// |V_m| at the targets for the best iterate.
    pub spot_amplitudes: Vec<f64>,
    /// Final per-spot weights.
    pub weights: Vec<f64>,
    /// (max − min)/(max + min) over spot intensities.
    pub uniformity_error: f64,
    /// Fraction of focal-plane power landing in the targets.
    pub efficiency: f64,
    pub converged: bool,
    pub iterations_run: usize,
    /// Uniformity after each forward pass.
    pub uniformity_history: Vec<f64>,
}

/// Uniformity metric over spot intensities |V|²: (max−min)/(max+min).
pub fn uniformity(spot_amplitudes: &[f64]) -> Result<f64> {
    if spot_amplitudes.is_empty() {
        return Err(Error::Input("uniformity of an empty spot list".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &a in spot_amplitudes {
        let p = a * a;
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if hi + lo == 0.0 {
        return Ok(0.0);
    }
    Ok((hi - lo) / (hi + lo))
}

/// Unitary 2D FFT on an n×n grid (power preserved by each transform).
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scratch: vec![Complex64::default(); n * n],
        }
    }

    fn pass(&mut self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let fft = if inverse { &self.inverse } else { &self.forward };
        for row in data.chunks_exact_mut(n) {
            fft.process(row);
        }
        // transpose, transform columns as rows, transpose back
        for y in 0..n {
            for x in 0..n {
                self.scratch[x * n + y] = data[y * n + x];
            }
        }
        for row in self.scratch.chunks_exact_mut(n) {
            fft.process(row);
        }
        let scale = 1.0 / n as f64;
        for y in 0..n {
            for x in 0..n {
                data[y * n + x] = self.scratch[x * n + y] * scale;
            }
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.pass(data, false);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.pass(data, true);
    }
}

fn spot_amps(field: &[Complex64], n: usize, targets: &[(usize, usize)]) -> Vec<f64> {
    targets.iter().map(|&(x, y)| field[y * n + x].norm()).collect()
}

/// Run WGS. Returns the best iterate by uniformity; `converged` is false if
/// the tolerance was never reached within the iteration budget.
pub fn wgs_solve(problem: &HologramProblem) -> Result<HologramSolution> {
    problem.validate()?;
    let n = problem.grid_size;
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut slm_phase: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * TAU).collect();
    let mut weights = vec![1.0f64; problem.targets.len()];
    let mut fft = Fft2::new(n);
    let mut field = vec![Complex64::default(); n * n];

    let mut best: Option<HologramSolution> = None;
    let mut history = Vec::with_capacity(problem.iterations);

    for iter in 1..=problem.iterations {
        for (f, &p) in field.iter_mut().zip(&slm_phase) {
            *f = Complex64::from_polar(1.0, p);
        }
        fft.forward(&mut field);

        let amps = spot_amps(&field, n, &problem.targets);
        let u = uniformity(&amps)?;
        history.push(u);
        let mean_amp = amps.iter().sum::<f64>() / amps.len() as f64;
        for (w, &a) in weights.iter_mut().zip(&amps) {
            if a > 1e-300 {
                *w *= mean_amp / a;
            }
        }

        // <= so that, on ties (single spot is always 0), the latest iterate
        // wins: it has been through the focal constraint at least once
        if best.as_ref().map_or(true, |b| u <= b.uniformity_error) {
            let total: f64 = field.iter().map(|v| v.norm_sqr()).sum();
            let in_spots: f64 = amps.iter().map(|a| a * a).sum();
            best = Some(HologramSolution {
                grid_size: n,
                phase: slm_phase.clone(),
                spot_amplitudes: amps.clone(),
                weights: weights.clone(),
                uniformity_error: u,
                efficiency: in_spots / total,
                converged: u < problem.tolerance,
                iterations_run: iter,
                uniformity_history: Vec::new(),
            });
        }
        // require one full constraint cycle before stopping: the very first
        // measurement sees the seed phase, not a shaped mask
        if u < problem.tolerance && iter > 1 {
            break;
        }

        // focal-plane constraint: imposed amplitude = weight, phase kept
        if problem.zero_non_targets {
            field.iter_mut().for_each(|v| *v = Complex64::default());
            for (&(x, y), &w) in problem.targets.iter().zip(&weights) {
                field[y * n + x] = Complex64::from_polar(w, 0.0);
            }
        } else {
            for (&(x, y), &w) in problem.targets.iter().zip(&weights) {
                let v = field[y * n + x];
                let arg = if v.norm() > 0.0 { v.arg() } else { 0.0 };
                field[y * n + x] = Complex64::from_polar(w, arg);
            }
        }
        fft.inverse(&mut field);
        for (p, f) in slm_phase.iter_mut().zip(&field) {
            *p = f.arg().rem_euclid(TAU);
        }
    }

    let mut sol = best.expect("at least one iteration ran");
    sol.uniformity_history = history;
    Ok(sol)
}

/// Re-measure a phase mask (e.g. after quantization): spot amplitudes,
/// uniformity, efficiency.
pub fn evaluate_phase(problem: &HologramProblem, phase: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    problem.validate()?;
    let n = problem.grid_size;
    if phase.len() != n * n {
        return Err(Error::Input("phase mask size mismatch".into()));
    }
    let mut fft = Fft2::new(n);
    let mut field: Vec<Complex64> = phase.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    fft.forward(&mut field);
    let amps = spot_amps(&field, n, &problem.targets);
    let u = uniformity(&amps)?;
    let total: f64 = field.iter().map(|v| v.norm_sqr()).sum();
    let in_spots: f64 = amps.iter().map(|a| a * a).sum();
    Ok((amps, u, in_spots / total))
}

/// Quantize phases to `levels` equally spaced SLM levels over [0, 2π).
pub fn quantize_phase(phase: &[f64], levels: u32) -> Vec<f64> {
    let step = TAU / levels as f64;
    phase
        .iter()
        .map(|&p| ((p.rem_euclid(TAU) / step).round() % levels as f64) * step)
        .collect()
}

/// 8-bit grayscale PGM (P5) rendering of a phase mask.
pub fn pgm_bytes(phase: &[f64], n: usize) -> Vec<u8> {
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(phase.iter().map(|&p| {
        ((p.rem_euclid(TAU) / TAU * 256.0).floor() as i64).clamp(0, 255) as u8
    }));
    out
}

/// Physical mapping from SLM pixels to focal-plane position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalGeometry {
    pub wavelength: f64,
    pub focal_length: f64,
    /// SLM pixel pitch Δ (m).
    pub slm_pitch: f64,
}

impl Default for FocalGeometry {
    fn default() -> Self {
        // 8 um SLM pixels and a focal length putting the 512-grid focal
        // pixel at 2.5 um, so the 5 um array pitch is exactly two pixels.
        FocalGeometry {
            wavelength: 935e-9,
            focal_length: 10.9519e-3,
            slm_pitch: 8e-6,
        }
    }
}

impl FocalGeometry {
    /// Focal-plane size of one FFT pixel: λf/(nΔ).
    pub fn focal_pixel_pitch(&self, grid_size: usize) -> f64 {
        self.wavelength * self.focal_length / (grid_size as f64 * self.slm_pitch)
    }

    /// Centered horizontal array of `n_spots` targets at physical pitch
    /// `spot_pitch`, rounded to grid pixels.
    pub fn linear_array_targets(
        &self,
        grid_size: usize,
        n_spots: usize,
        spot_pitch: f64,
    ) -> Result<Vec<(usize, usize)>> {
        if n_spots == 0 {
            return Err(Error::Input("no spots requested".into()));
        }
        let px = self.focal_pixel_pitch(grid_size);
        let step = spot_pitch / px;
        if step.round() < 1.0 {
            return Err(Error::Input(format!(
                "spot pitch {spot_pitch} below focal pixel {px}"
            )));
        }
        let y = grid_size / 2;
        let x0 = grid_size as f64 / 2.0 - step * (n_spots as f64 - 1.0) / 2.0;
        let mut targets = Vec::with_capacity(n_spots);
        for m in 0..n_spots {
            let x = (x0 + step * m as f64).round();
            if x < 0.0 || x as usize >= grid_size {
                return Err(Error::Input(format!(
                    "spot {m} falls off the grid at pixel {x}; enlarge the grid"
                )));
            }
            targets.push((x as usize, y));
        }
        Ok(targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_array_problem() -> HologramProblem {
        let geom = FocalGeometry::default();
        HologramProblem {
            grid_size: 512,
            targets: geom.linear_array_targets(512, 200, 5e-6).unwrap(),
            iterations: 100,
            tolerance: 0.01,
            zero_non_targets: false,
            seed: 1,
        }
    }

    #[test]
    fn uniformity_metric() {
        assert_eq!(uniformity(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(uniformity(&[0.0, 1.0, 2.0]).unwrap(), 1.0);
        // intensities {1, 3} -> (3-1)/(3+1)
        let got = uniformity(&[1.0, 3f64.sqrt()]).unwrap();
        assert!((got - 0.5).abs() < 1e-12);
        assert!(uniformity(&[]).is_err());
        assert_eq!(uniformity(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn focal_mapping_default_pitch() {
        let geom = FocalGeometry::default();
        let px = geom.focal_pixel_pitch(512);
        assert!((px / 2.5e-6 - 1.0).abs() < 1e-4);
        let targets = geom.linear_array_targets(512, 200, 5e-6).unwrap();
        assert_eq!(targets.len(), 200);
        assert_eq!(targets[1].0 - targets[0].0, 2);
        assert!(targets.iter().all(|&(x, _)| x < 512));
    }

    #[test]
    fn energy_conserved_by_transform() {
        let n = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut field: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * TAU))
            .collect();
        let before: f64 = field.iter().map(|v| v.norm_sqr()).sum();
        let mut fft = Fft2::new(n);
        fft.forward(&mut field);
        let mid: f64 = field.iter().map(|v| v.norm_sqr()).sum();
        fft.inverse(&mut field);
        let after: f64 = field.iter().map(|v| v.norm_sqr()).sum();
        assert!((mid / before - 1.0).abs() < 1e-10);
        assert!((after / before - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_spot_is_a_blazed_grating() {
        let problem = HologramProblem {
            grid_size: 64,
            targets: vec![(5, 9)],
            iterations: 3,
            tolerance: 1e-6,
            zero_non_targets: true,
            seed: 42,
        };
        let sol = wgs_solve(&problem).unwrap();
        assert_eq!(sol.uniformity_error, 0.0);
        assert!(sol.efficiency > 0.999, "efficiency {}", sol.efficiency);
        // discrete linear ramp: row-wise phase steps constant mod 2π
        let n = 64;
        let step = |a: f64, b: f64| (b - a).rem_euclid(TAU);
        let dx = step(sol.phase[0], sol.phase[1]);
        for y in 0..n {
            for x in 0..n - 1 {
                let d = step(sol.phase[y * n + x], sol.phase[y * n + x + 1]);
                assert!((d - dx).abs() < 1e-9, "ramp broken at ({x}, {y})");
            }
        }
    }

    #[test]
    fn default_array_converges_below_percent() {
        let sol = wgs_solve(&default_array_problem()).unwrap();
        assert!(sol.converged, "uniformity {}", sol.uniformity_error);
        assert!(sol.uniformity_error < 0.01);
        assert!(sol.iterations_run <= 100);
        // the reported best is the minimum of the whole history
        let min = sol.uniformity_history.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(sol.uniformity_error <= min + 1e-15);
        assert!(sol.uniformity_error < sol.uniformity_history[0]);
    }

    #[test]
    fn quantization_degrades_within_bound() {
        let problem = default_array_problem();
        let sol = wgs_solve(&problem).unwrap();
        let q = quantize_phase(&sol.phase, 256);
        let (_, u, _) = evaluate_phase(&problem, &q).unwrap();
        assert!(u < 0.05, "8-bit uniformity {u}");
    }

    #[test]
    fn unweighted_first_pass() {
        // first forward pass equals plain Gerchberg-Saxton: weights all 1
        let problem = HologramProblem {
            grid_size: 32,
            targets: vec![(4, 16), (12, 16), (20, 16)],
            iterations: 1,
            tolerance: 1e-12,
            zero_non_targets: false,
            seed: 9,
        };
        let sol = wgs_solve(&problem).unwrap();
        // after one iteration the weights have been updated once from 1
        let mean: f64 = sol.spot_amplitudes.iter().sum::<f64>() / 3.0;
        for (w, a) in sol.weights.iter().zip(&sol.spot_amplitudes) {
            assert!((w - mean / a).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_problems() {
        let mut p = default_array_problem();
        p.grid_size = 100; // not a power of two
        assert!(wgs_solve(&p).is_err());
        let mut p = default_array_problem();
        p.targets = vec![(1000, 0)];
        assert!(wgs_solve(&p).is_err());
        let mut p = default_array_problem();
        p.targets = vec![(3, 3), (3, 3)];
        assert!(wgs_solve(&p).is_err());
        let mut p = default_array_problem();
        p.iterations = 0;
        assert!(wgs_solve(&p).is_err());
        let mut p = default_array_problem();
        p.targets.clear();
        assert!(wgs_solve(&p).is_err());
    }

    #[test]
    fn pgm_wellformed() {
        let phase = vec![0.0, TAU * 0.25, TAU * 0.5, TAU * 0.9999];
        let bytes = pgm_bytes(&phase, 2);
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        let data = &bytes[bytes.len() - 4..];
        assert_eq!(data, &[0u8, 64, 128, 255]);
    }
}
