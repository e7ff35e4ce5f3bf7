//! Fits of two-component optical-depth decay traces,
//! OD(t) = 2 β₁ N₁ e^{−t/τ₁} + 2 β₂ N₂ e^{−t/τ₂},
//! with the coupling strengths β fixed and an F-test to decide whether the
//! fast component is present at all.

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::lm::{levenberg_marquardt, LmOptions};
use crate::error::{Error, Result};

/// A fitted decay model of a given order (1 = slow component only).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DecayFit {
    pub order: usize,
    /// Atom numbers; `n1` is zero for an order-1 fit.
    pub n1: f64,
    /// Fast time constant (s); zero for an order-1 fit.
    pub tau1: f64,
    pub n2: f64,
    /// Slow time constant (s).
    pub tau2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Euclidean norm of the OD residuals.
    pub residual_norm: f64,
    pub converged: bool,
}

impl DecayFit {
    pub fn od_at(&self, t: f64) -> f64 {
        let fast = if self.order == 2 {
            2.0 * self.beta1 * self.n1 * (-t / self.tau1).exp()
        } else {
            0.0
        };
        fast + 2.0 * self.beta2 * self.n2 * (-t / self.tau2).exp()
    }
}

/// Order selection result: both fits, the F statistic comparing them, and
/// the recommended model.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DecayOrderSelection {
    pub fit1: DecayFit,
    pub fit2: DecayFit,
    pub f_statistic: f64,
    pub f_critical: f64,
    /// True when the two-component model is statistically justified.
    pub order2_significant: bool,
}

impl DecayOrderSelection {
    /// The fit the F-test recommends.
    pub fn chosen(&self) -> &DecayFit {
        if self.order2_significant {
            &self.fit2
        } else {
            &self.fit1
        }
    }
}

fn validate_trace(times: &[f64], od: &[f64], min_len: usize) -> Result<()> {
    if times.len() != od.len() {
        return Err(Error::Input(format!(
            "{} times but {} OD samples",
            times.len(),
            od.len()
        )));
    }
    if times.len() < min_len {
        return Err(Error::Input(format!(
            "need at least {min_len} samples, got {}",
            times.len()
        )));
    }
    if times[0] < 0.0 || times.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Input(
            "hold times must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Least-squares line through (x, y): returns (slope, intercept).
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

/// Log-linear estimate of (amplitude_prefactor N, τ) from points where the
/// model is a single exponential 2 β N e^{−t/τ}.
fn single_exp_init(times: &[f64], od: &[f64], beta: f64) -> (f64, f64) {
    let span = times[times.len() - 1] - times[0];
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(od)
        .filter(|(_, &o)| o > 0.0)
        .map(|(&t, &o)| (t, o.ln()))
        .collect();
    if pts.len() < 2 {
        return (od[0].max(0.01) / (2.0 * beta), span.max(1e-6));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, intercept) = line_fit(&xs, &ys);
    let tau = if slope < -1e-12 { -1.0 / slope } else { span.max(1e-6) };
    let n = intercept.exp() / (2.0 * beta);
    (n.max(1e-6), tau)
}

/// Fit a decay model of the given `order` (1 or 2) with fixed couplings.
///
/// Starting values come from log-linear fits: the trailing 40 % of the
/// trace pins the slow component, and the positive early-time residual
/// after subtracting it seeds the fast one. Parameters are constrained
/// non-negative, and an order-2 result is relabeled if needed so that
/// `tau1 < tau2`.
pub fn fit_od_decay(
    times: &[f64],
    od: &[f64],
    beta1: f64,
    beta2: f64,
    order: usize,
) -> Result<DecayFit> {
    if !(beta1 > 0.0) || !(beta2 > 0.0) {
        return Err(Error::Input("couplings must be positive".into()));
    }
    match order {
        1 => {
            validate_trace(times, od, 4)?;
            let (n2_0, tau2_0) = single_exp_init(times, od, beta2);
            let resid = |p: &[f64]| -> Vec<f64> {
                times
                    .iter()
                    .zip(od)
                    .map(|(&t, &o)| 2.0 * beta2 * p[0] * (-t / p[1]).exp() - o)
                    .collect()
            };
            let jac = |p: &[f64]| -> Vec<Vec<f64>> {
                times
                    .iter()
                    .map(|&t| {
                        let e = (-t / p[1]).exp();
                        vec![
                            2.0 * beta2 * e,
                            2.0 * beta2 * p[0] * e * t / (p[1] * p[1]),
                        ]
                    })
                    .collect()
            };
            let span = times[times.len() - 1].max(1e-6);
            let fit = levenberg_marquardt(
                resid,
                jac,
                &[n2_0, tau2_0],
                &[0.0, 1e-9],
                &[1e9, 1e4 * span],
                &LmOptions::default(),
            )?;
            Ok(DecayFit {
                order: 1,
                n1: 0.0,
                tau1: 0.0,
                n2: fit.params[0],
                tau2: fit.params[1],
                beta1,
                beta2,
                residual_norm: fit.residual_norm,
                converged: fit.converged,
            })
        }
        2 => {
            validate_trace(times, od, 8)?;
            let n = times.len();
            // slow component from the tail
            let tail = (n as f64 * 0.6).floor() as usize;
            let (n2_0, tau2_0) = single_exp_init(&times[tail..], &od[tail..], beta2);
            // fast component from the early-time excess
            let head = ((n as f64 * 0.3).ceil() as usize).max(2);
            let mut ht = Vec::new();
            let mut hr = Vec::new();
            for i in 0..head {
                let r = od[i] - 2.0 * beta2 * n2_0 * (-times[i] / tau2_0).exp();
                if r > 0.0 {
                    ht.push(times[i]);
                    hr.push(r.ln());
                }
            }
            let (n1_0, tau1_0) = if ht.len() >= 2 {
                let (slope, intercept) = line_fit(&ht, &hr);
                let tau = if slope < -1e-12 { -1.0 / slope } else { tau2_0 / 5.0 };
                ((intercept.exp() / (2.0 * beta1)).max(1e-6), tau)
            } else {
                ((0.1 * n2_0 * beta2 / beta1).max(1e-6), tau2_0 / 5.0)
            };
            let resid = |p: &[f64]| -> Vec<f64> {
                times
                    .iter()
                    .zip(od)
                    .map(|(&t, &o)| {
                        2.0 * beta1 * p[0] * (-t / p[1]).exp()
                            + 2.0 * beta2 * p[2] * (-t / p[3]).exp()
                            - o
                    })
                    .collect()
            };
            let jac = |p: &[f64]| -> Vec<Vec<f64>> {
                times
                    .iter()
                    .map(|&t| {
                        let e1 = (-t / p[1]).exp();
                        let e2 = (-t / p[3]).exp();
                        vec![
                            2.0 * beta1 * e1,
                            2.0 * beta1 * p[0] * e1 * t / (p[1] * p[1]),
                            2.0 * beta2 * e2,
                            2.0 * beta2 * p[2] * e2 * t / (p[3] * p[3]),
                        ]
                    })
                    .collect()
            };
            let span = times[n - 1].max(1e-6);
            let fit = levenberg_marquardt(
                resid,
                jac,
                &[n1_0, tau1_0, n2_0, tau2_0],
                &[0.0, 1e-9, 0.0, 1e-9],
                &[1e9, 1e4 * span, 1e9, 1e4 * span],
                &LmOptions::default(),
            )?;
            let (mut n1, mut tau1, mut n2, mut tau2) =
                (fit.params[0], fit.params[1], fit.params[2], fit.params[3]);
            if tau1 > tau2 {
                // relabel so component 1 is the fast one, rescaling the atom
                // numbers through the fixed couplings
                (n1, n2) = (n2 * beta2 / beta1, n1 * beta1 / beta2);
                (tau1, tau2) = (tau2, tau1);
            }
            Ok(DecayFit {
                order: 2,
                n1,
                tau1,
                n2,
                tau2,
                beta1,
                beta2,
                residual_norm: fit.residual_norm,
                converged: fit.converged,
            })
        }
        _ => Err(Error::Input(format!("order must be 1 or 2, got {order}"))),
    }
}

/// Fit both orders and compare them with an F-test at significance
/// `alpha`: F = ((SS₁ − SS₂)/2) / (SS₂/(n − 4)) against the 0.99 (for
/// `alpha` = 0.01) quantile of F(2, n − 4).
pub fn select_decay_order(
    times: &[f64],
    od: &[f64],
    beta1: f64,
    beta2: f64,
    alpha: f64,
) -> Result<DecayOrderSelection> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Input(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    validate_trace(times, od, 8)?;
    let n = times.len();
    if n < 5 {
        return Err(Error::Input("F-test needs more samples than parameters".into()));
    }
    let fit1 = fit_od_decay(times, od, beta1, beta2, 1)?;
    let fit2 = fit_od_decay(times, od, beta1, beta2, 2)?;
    let ss1 = fit1.residual_norm.powi(2);
    let ss2 = fit2.residual_norm.powi(2);
    let dof = (n - 4) as f64;
    let f_statistic = if ss2 > 0.0 {
        ((ss1 - ss2) / 2.0).max(0.0) / (ss2 / dof)
    } else {
        f64::INFINITY
    };
    let dist = FisherSnedecor::new(2.0, dof)
        .map_err(|e| Error::Input(format!("F distribution: {e}")))?;
    let f_critical = dist.inverse_cdf(1.0 - alpha);
    Ok(DecayOrderSelection {
        fit1,
        fit2,
        f_statistic,
        f_critical,
        order2_significant: f_statistic > f_critical,
    })
}
