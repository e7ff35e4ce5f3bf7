//! Second-order correlation analysis of two-channel time-tag streams:
//! cross-correlation histograms, reference-window normalization, and the
//! damped-Rabi closed form.

use crate::error::{Error, Result};
use crate::ttag::TimeTagStream;

/// Unnormalized cross-correlation histogram between channels 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    /// Signed delay at each bin center (s); τ = t₁ − t₀.
    pub tau: Vec<f64>,
    /// Coincidence counts per bin.
    pub counts: Vec<u64>,
    /// Bin width (s).
    pub bin_width: f64,
}

/// Normalized correlation function.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    pub tau: Vec<f64>,
    pub g2: Vec<f64>,
    pub bin_width: f64,
    /// Mean raw counts per bin inside the reference window; the divisor
    /// used for normalization.
    pub reference_level: f64,
    /// Total raw counts inside the reference window.
    pub reference_counts: u64,
}

/// Histogram all channel-0/channel-1 pairs with |τ| up to `window` into
/// bins of `bin_width` centered on zero delay. `bin_width` must be a
/// positive integer multiple of the stream resolution, and both channels
/// must be non-empty.
pub fn coincidence_histogram(
    stream: &TimeTagStream,
    bin_width: f64,
    window: f64,
) -> Result<CoincidenceHistogram> {
    let res = stream.resolution_seconds();
    if !(bin_width > 0.0) || !(window > 0.0) {
        return Err(Error::Input("bin width and window must be positive".into()));
    }
    let bin_ticks_f = bin_width / res;
    let bin_ticks = bin_ticks_f.round();
    if bin_ticks < 1.0 || (bin_ticks_f - bin_ticks).abs() > 1e-6 * bin_ticks {
        return Err(Error::Input(format!(
            "bin width {bin_width} s is not an integer multiple of the {res} s resolution"
        )));
    }
    let bin_ticks = bin_ticks as i64;
    let half_bins = (window / bin_width).floor() as i64;
    if half_bins < 1 {
        return Err(Error::Input("window must cover at least one bin".into()));
    }
    let t0 = stream.channel(0);
    let t1 = stream.channel(1);
    if t0.is_empty() || t1.is_empty() {
        return Err(Error::Input(
            "both channels must contain events for a cross-correlation".into(),
        ));
    }

    let n_bins = (2 * half_bins + 1) as usize;
    let mut counts = vec![0u64; n_bins];
    // acceptance range in ticks: bin k collects τ ∈ [k*b − b/2, k*b + b/2)
    let max_tau = half_bins * bin_ticks + bin_ticks / 2 + (bin_ticks % 2);
    let mut start = 0usize;
    for &a in &t0 {
        let a = a as i64;
        while start < t1.len() && (t1[start] as i64) < a - max_tau {
            start += 1;
        }
        for &b in &t1[start..] {
            let tau = b as i64 - a;
            if tau > max_tau {
                break;
            }
            // round τ/bin to nearest, half away from zero
            let k = if tau >= 0 {
                (2 * tau + bin_ticks) / (2 * bin_ticks)
            } else {
                -((2 * -tau + bin_ticks) / (2 * bin_ticks))
            };
            if k.abs() <= half_bins {
                counts[(k + half_bins) as usize] += 1;
            }
        }
    }
    let tau = (0..n_bins)
        .map(|i| (i as i64 - half_bins) as f64 * bin_ticks as f64 * res)
        .collect();
    Ok(CoincidenceHistogram {
        tau,
        counts,
        bin_width: bin_ticks as f64 * res,
    })
}

/// Normalize a histogram so the mean over the reference delay window
/// `ref_lo < |τ| < ref_hi` is exactly 1. Fails when the window selects no
/// bins or holds fewer than `min_counts` total counts.
pub fn normalize_g2(
    hist: &CoincidenceHistogram,
    ref_lo: f64,
    ref_hi: f64,
    min_counts: u64,
) -> Result<G2Curve> {
    if !(ref_hi > ref_lo) || !(ref_lo >= 0.0) {
        return Err(Error::Input(format!(
            "reference window [{ref_lo}, {ref_hi}] is not ordered"
        )));
    }
    let mut total = 0u64;
    let mut n_ref = 0u64;
    for (&t, &c) in hist.tau.iter().zip(&hist.counts) {
        if t.abs() > ref_lo && t.abs() < ref_hi {
            total += c;
            n_ref += 1;
        }
    }
    if n_ref == 0 {
        return Err(Error::Input(
            "reference window selects no histogram bins".into(),
        ));
    }
    if total < min_counts {
        return Err(Error::Input(format!(
            "reference window holds {total} counts, need at least {min_counts}"
        )));
    }
    let level = total as f64 / n_ref as f64;
    Ok(G2Curve {
        tau: hist.tau.clone(),
        g2: hist.counts.iter().map(|&c| c as f64 / level).collect(),
        bin_width: hist.bin_width,
        reference_level: level,
        reference_counts: total,
    })
}

/// Equal-time correlation: the mean of g² over bins with |τ| within
/// `half_width` of zero.
pub fn g2_zero(curve: &G2Curve, half_width: f64) -> Result<f64> {
    if !(half_width >= 0.0) {
        return Err(Error::Input("half_width must be non-negative".into()));
    }
    let eps = 1e-9 * curve.bin_width.max(1e-30);
    let sel: Vec<f64> = curve
        .tau
        .iter()
        .zip(&curve.g2)
        .filter(|(t, _)| t.abs() <= half_width + eps)
        .map(|(_, &g)| g)
        .collect();
    if sel.is_empty() {
        return Err(Error::Input("no bins within the zero-delay window".into()));
    }
    Ok(sel.iter().sum::<f64>() / sel.len() as f64)
}

/// Generalized Rabi frequency κ = sqrt((2Ω)² − (γ/4)²) of the damped-Rabi
/// correlation, for transverse decay rate γ and Rabi frequency Ω (both
/// rad/s). Errors when the drive is too weak for oscillations.
pub fn kappa(gamma: f64, omega: f64) -> Result<f64> {
    if !(gamma > 0.0) || !(omega >= 0.0) {
        return Err(Error::Domain(format!(
            "need γ > 0 and Ω >= 0, got γ = {gamma}, Ω = {omega}"
        )));
    }
    let k2 = (2.0 * omega).powi(2) - (gamma / 4.0).powi(2);
    if k2 <= 0.0 {
        return Err(Error::Domain(format!(
            "overdamped drive: (2Ω)² <= (γ/4)² at γ = {gamma}, Ω = {omega}"
        )));
    }
    Ok(k2.sqrt())
}

/// Closed-form correlation of a resonantly driven two-level emitter diluted
/// by uncorrelated light:
/// g²(τ) = (1−δ)·[1 − e^{−3γ|τ|/4}(cos κτ + (3γ/4κ) sin κ|τ|)] + δ.
pub fn g2_theory(gamma: f64, omega: f64, dilution: f64, tau: &[f64]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&dilution) {
        return Err(Error::Domain(format!(
            "dilution must lie in [0, 1], got {dilution}"
        )));
    }
    let k = kappa(gamma, omega)?;
    Ok(tau
        .iter()
        .map(|&t| {
            let at = t.abs();
            let osc = (k * at).cos() + 3.0 * gamma / (4.0 * k) * (k * at).sin();
            (1.0 - dilution) * (1.0 - (-0.75 * gamma * at).exp() * osc) + dilution
        })
        .collect())
}
