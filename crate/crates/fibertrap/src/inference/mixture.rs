//! Occupancy estimation from per-window photocount histograms: a
//! two-component Poisson mixture with a fixed background mean, fitted by
//! expectation–maximization with multistarts.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Result of a mixture fit to a count histogram.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MixtureFit {
    /// Weight of the bright (atom) component.
    pub weight: f64,
    /// Mean detected counts of the bright component.
    pub mu_atom: f64,
    /// Fixed mean of the background component.
    pub mu_background: f64,
    /// Maximized log-likelihood.
    pub log_likelihood: f64,
    /// Standard errors of (weight, mu_atom) from the observed information
    /// matrix; NaN when the curvature is not positive definite.
    pub weight_stderr: f64,
    pub mu_atom_stderr: f64,
    /// Estimated number of occupied windows, round(weight * total).
    pub n_occupied: u64,
    /// Total number of windows in the histogram.
    pub n_windows: u64,
    pub em_iterations: usize,
    pub converged: bool,
}

/// Fraction of windows with zero counts under the mixture.
pub fn mixture_zero_fraction(weight: f64, mu_atom: f64, mu_background: f64) -> f64 {
    weight * (-mu_atom).exp() + (1.0 - weight) * (-mu_background).exp()
}

fn ln_poisson(k: f64, mu: f64) -> f64 {
    if mu <= 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k * mu.ln() - mu - ln_gamma(k + 1.0)
}

fn log_likelihood(hist: &[u64], w: f64, mu_a: f64, mu_b: f64) -> f64 {
    let mut ll = 0.0;
    for (k, &n) in hist.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let k = k as f64;
        let la = w.ln() + ln_poisson(k, mu_a);
        let lb = (1.0 - w).ln() + ln_poisson(k, mu_b);
        // log-sum-exp of the two component densities
        let m = la.max(lb);
        let l = if m.is_finite() {
            m + ((la - m).exp() + (lb - m).exp()).ln()
        } else {
            f64::NEG_INFINITY
        };
        ll += n as f64 * l;
    }
    ll
}

/// Fit the bright-component weight and mean of a Poisson mixture
/// `w·Pois(μ_a) + (1−w)·Pois(μ_b)` to a count histogram (`hist[k]` windows
/// recorded `k` counts), with the background mean `mu_background` held
/// fixed.
///
/// EM runs from ten starting means and keeps the best likelihood. A
/// histogram whose counts are all zero yields the degenerate answer
/// `weight = 0` (with `mu_atom` NaN); a histogram concentrated on a single
/// non-zero count cannot separate the components and is rejected.
pub fn fit_poisson_mixture(hist: &[u64], mu_background: f64) -> Result<MixtureFit> {
    if !(mu_background >= 0.0) || !mu_background.is_finite() {
        return Err(Error::Input(format!(
            "background mean must be non-negative, got {mu_background}"
        )));
    }
    let m: u64 = hist.iter().sum();
    if m == 0 {
        return Err(Error::Input("count histogram is empty".into()));
    }
    let distinct = hist.iter().filter(|&&n| n > 0).count();
    let only_zero = distinct == 1 && hist[0] > 0;
    if only_zero {
        return Ok(MixtureFit {
            weight: 0.0,
            mu_atom: f64::NAN,
            mu_background,
            log_likelihood: -(m as f64) * mu_background,
            weight_stderr: f64::NAN,
            mu_atom_stderr: f64::NAN,
            n_occupied: 0,
            n_windows: m,
            em_iterations: 0,
            converged: true,
        });
    }
    if distinct == 1 {
        return Err(Error::Input(
            "all windows share one non-zero count; mixture is not identifiable".into(),
        ));
    }

    let total = m as f64;
    let mut best: Option<(f64, f64, f64, usize, bool)> = None; // ll, w, mu_a, iters, conv
    for start in 0..10 {
        let mut mu_a = mu_background + 0.1 + (5.0 - mu_background - 0.1).max(0.0) * start as f64 / 9.0;
        let mut w = 0.5;
        let mut ll = log_likelihood(hist, w, mu_a, mu_background);
        let mut converged = false;
        let mut iters = 0;
        for _ in 0..10_000 {
            iters += 1;
            // E step: responsibility of the bright component per count value
            let mut sum_r = 0.0;
            let mut sum_rk = 0.0;
            for (k, &n) in hist.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let kf = k as f64;
                let la = w.ln() + ln_poisson(kf, mu_a);
                let lb = (1.0 - w).ln() + ln_poisson(kf, mu_background);
                let r = if la == f64::NEG_INFINITY {
                    0.0
                } else if lb == f64::NEG_INFINITY {
                    1.0
                } else {
                    1.0 / (1.0 + (lb - la).exp())
                };
                sum_r += n as f64 * r;
                sum_rk += n as f64 * r * kf;
            }
            // M step
            w = (sum_r / total).clamp(1e-12, 1.0 - 1e-12);
            mu_a = if sum_r > 0.0 { sum_rk / sum_r } else { mu_a };
            let ll_new = log_likelihood(hist, w, mu_a, mu_background);
            if (ll_new - ll).abs() < 1e-9 {
                ll = ll_new;
                converged = true;
                break;
            }
            ll = ll_new;
        }
        if best.as_ref().map_or(true, |b| ll > b.0) {
            best = Some((ll, w, mu_a, iters, converged));
        }
    }
    let (ll, w, mu_a, iters, converged) = best.unwrap();

    // observed information from a central-difference Hessian of the
    // log-likelihood in (w, mu_a)
    let f = |p: &[f64]| log_likelihood(hist, p[0], p[1], mu_background);
    let (se_w, se_mu) = stderr_from_hessian(f, &[w, mu_a]);

    Ok(MixtureFit {
        weight: w,
        mu_atom: mu_a,
        mu_background,
        log_likelihood: ll,
        weight_stderr: se_w,
        mu_atom_stderr: se_mu,
        n_occupied: (w * total).round() as u64,
        n_windows: m,
        em_iterations: iters,
        converged,
    })
}

fn stderr_from_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mut h = vec![0.0; n * n];
    let step: Vec<f64> = x.iter().map(|v| 1e-5 * v.abs().max(1e-3)).collect();
    let f0 = f(x);
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                let mut xp = x.to_vec();
                xp[i] += step[i];
                let mut xm = x.to_vec();
                xm[i] -= step[i];
                (f(&xp) - 2.0 * f0 + f(&xm)) / (step[i] * step[i])
            } else {
                let mut xpp = x.to_vec();
                xpp[i] += step[i];
                xpp[j] += step[j];
                let mut xpm = x.to_vec();
                xpm[i] += step[i];
                xpm[j] -= step[j];
                let mut xmp = x.to_vec();
                xmp[i] -= step[i];
                xmp[j] += step[j];
                let mut xmm = x.to_vec();
                xmm[i] -= step[i];
                xmm[j] -= step[j];
                (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * step[i] * step[j])
            };
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    // covariance = inverse of −H for a 2×2 system
    let (a, b, d) = (-h[0], -h[1], -h[3]);
    let det = a * d - b * b;
    if det > 0.0 && a > 0.0 {
        ((d / det).sqrt(), (a / det).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    }
}

/// Lower bound on the number of occupied windows from zero-count fractions
/// alone: if the control (no-load) run has zero fraction `zf_control` and
/// the loaded run `zf_loaded`, at least `floor((zf_control − zf_loaded) ·
/// n_windows)` windows held an atom, whatever the bright-count
/// distribution. Fractions must lie in [0, 1].
pub fn lower_bound_atoms(zf_loaded: f64, zf_control: f64, n_windows: u64) -> Result<u64> {
    for (name, v) in [("zf_loaded", zf_loaded), ("zf_control", zf_control)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!(
                "{name} must be a fraction in [0, 1], got {v}"
            )));
        }
    }
    let diff = (zf_control - zf_loaded).max(0.0);
    Ok((diff * n_windows as f64).floor() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::sample_mixture_counts;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_fraction_closed_form() {
        let zf = mixture_zero_fraction(0.775, 1.22, 0.0137);
        assert!((zf - 0.4507).abs() < 1e-4, "zf = {zf}");
    }

    #[test]
    fn recovers_known_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let hist = sample_mixture_counts(0.775, 1.22, 0.0137, 200_000, &mut rng).unwrap();
        let fit = fit_poisson_mixture(&hist, 0.0137).unwrap();
        assert!(fit.converged);
        assert!((fit.weight - 0.775).abs() < 0.01, "w = {}", fit.weight);
        assert!((fit.mu_atom - 1.22).abs() < 0.02, "mu = {}", fit.mu_atom);
        // standard errors on a 200k-window sample are small and finite
        assert!(fit.weight_stderr > 0.0 && fit.weight_stderr < 0.01);
        assert!(fit.mu_atom_stderr > 0.0 && fit.mu_atom_stderr < 0.02);
        let expect_occ = (fit.weight * 200_000.0).round() as u64;
        assert_eq!(fit.n_occupied, expect_occ);
    }

    #[test]
    fn small_sample_at_experiment_scale() {
        // one 200-site scan: weight uncertainty ~ 0.03
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hist = sample_mixture_counts(0.775, 1.22, 0.0137, 200, &mut rng).unwrap();
        let fit = fit_poisson_mixture(&hist, 0.0137).unwrap();
        assert!((fit.weight - 0.775).abs() < 0.1);
        assert!(fit.n_occupied > 120 && fit.n_occupied < 190);
    }

    #[test]
    fn likelihood_is_scale_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hist = sample_mixture_counts(0.6, 2.0, 0.05, 5_000, &mut rng).unwrap();
        let fit1 = fit_poisson_mixture(&hist, 0.05).unwrap();
        let hist3: Vec<u64> = hist.iter().map(|&n| 3 * n).collect();
        let fit3 = fit_poisson_mixture(&hist3, 0.05).unwrap();
        assert!((fit1.weight - fit3.weight).abs() < 1e-6);
        assert!((fit1.mu_atom - fit3.mu_atom).abs() < 1e-6);
        assert!((fit3.log_likelihood - 3.0 * fit1.log_likelihood).abs() < 1e-6);
        assert_eq!(fit3.n_windows, 3 * fit1.n_windows);
    }

    #[test]
    fn degenerate_histograms() {
        // all windows empty: weight 0
        let fit = fit_poisson_mixture(&[500], 0.0137).unwrap();
        assert_eq!(fit.weight, 0.0);
        assert_eq!(fit.n_occupied, 0);
        assert!(fit.mu_atom.is_nan());
        // all windows share a single non-zero count: not identifiable
        assert!(fit_poisson_mixture(&[0, 0, 77], 0.0137).is_err());
        // empty histogram
        assert!(fit_poisson_mixture(&[], 0.0137).is_err());
        assert!(fit_poisson_mixture(&[0, 0], -0.1).is_err());
    }

    #[test]
    fn zero_background_mixture() {
        // μ_b = 0 makes every non-zero count unambiguous
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hist = sample_mixture_counts(0.5, 1.5, 0.0, 50_000, &mut rng).unwrap();
        let fit = fit_poisson_mixture(&hist, 0.0).unwrap();
        assert!((fit.weight - 0.5).abs() < 0.01);
        assert!((fit.mu_atom - 1.5).abs() < 0.03);
    }

    #[test]
    fn lower_bound_arithmetic() {
        assert_eq!(lower_bound_atoms(0.443, 0.985, 200).unwrap(), 108);
        assert_eq!(lower_bound_atoms(0.985, 0.443, 200).unwrap(), 0); // clamped
        assert_eq!(lower_bound_atoms(0.5, 0.5, 1000).unwrap(), 0);
        assert!(lower_bound_atoms(-0.1, 0.5, 10).is_err());
        assert!(lower_bound_atoms(0.1, 1.5, 10).is_err());
    }
}
