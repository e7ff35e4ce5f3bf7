//! Small dense Levenberg–Marquardt solver with box constraints, sized for
//! the handful-of-parameter fits used elsewhere in the crate.

use crate::error::{Error, Result};

/// Options for [`levenberg_marquardt`].
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Convergence when every parameter moves by less than this relative
    /// amount in an accepted step.
    pub relative_step_tol: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            relative_step_tol: 1e-10,
            initial_lambda: 1e-3,
        }
    }
}

/// Result of a fit.
#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Euclidean norm of the residual vector at the solution.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lower[i], upper[i]);
    }
}

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting;
/// `a` is n×n row-major. Returns None when the system is singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Some(x)
}

/// Minimize `|r(x)|²` subject to `lower <= x <= upper`.
///
/// `residuals` maps parameters to the residual vector; `jacobian` returns
/// the m×n Jacobian ∂r_i/∂x_j as rows. Steps solve the damped normal
/// equations (JᵀJ + λ diag JᵀJ) δ = −Jᵀr and are projected onto the box.
pub fn levenberg_marquardt<FR, FJ>(
    residuals: FR,
    jacobian: FJ,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &LmOptions,
) -> Result<LmFit>
where
    FR: Fn(&[f64]) -> Vec<f64>,
    FJ: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let n = x0.len();
    if n == 0 || lower.len() != n || upper.len() != n {
        return Err(Error::Input("parameter/bound dimensions disagree".into()));
    }
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Err(Error::Input("lower bound exceeds upper bound".into()));
    }
    let mut x = x0.to_vec();
    clamp(&mut x, lower, upper);
    let mut r = residuals(&x);
    let m = r.len();
    if m < n {
        return Err(Error::Input(format!(
            "{m} residuals cannot constrain {n} parameters"
        )));
    }
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&x);
        if jac.len() != m || jac.iter().any(|row| row.len() != n) {
            return Err(Error::Input("jacobian shape mismatch".into()));
        }
        // normal equations
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for (row, ri) in jac.iter().zip(&r) {
            for i in 0..n {
                jtr[i] += row[i] * ri;
                for j in i..n {
                    jtj[i * n + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                jtj[i * n + j] = jtj[j * n + i];
            }
        }

        let mut accepted = false;
        let mut step_rel: f64 = 0.0;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..n {
                let d = if jtj[i * n + i] > 0.0 { jtj[i * n + i] } else { 1.0 };
                a[i * n + i] += lambda * d;
            }
            let mut b: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(delta) = solve_dense(&mut a, &mut b, n) else {
                lambda *= 2.0;
                continue;
            };
            let mut x_new: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + d).collect();
            clamp(&mut x_new, lower, upper);
            let r_new = residuals(&x_new);
            let cost_new: f64 = r_new.iter().map(|v| v * v).sum();
            if cost_new.is_finite() && cost_new < cost {
                step_rel = x
                    .iter()
                    .zip(&x_new)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-30))
                    .fold(0.0, f64::max);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda / 2.0).max(1e-14);
                accepted = true;
                break;
            }
            lambda *= 2.0;
        }
        if !accepted {
            // no downhill step exists at any damping: stationary point
            converged = true;
            break;
        }
        if step_rel < opts.relative_step_tol {
            converged = true;
            break;
        }
    }

    Ok(LmFit {
        params: x,
        residual_norm: cost.sqrt(),
        iterations,
        converged,
    })
}

/// Central-difference Jacobian of `f` at `x`, for validating analytic ones.
pub fn finite_difference_jacobian<F>(f: F, x: &[f64], rel_step: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let m = f(x).len();
    let mut jac = vec![vec![0.0; n]; m];
    for j in 0..n {
        let h = rel_step * x[j].abs().max(1e-8);
        let mut xp = x.to_vec();
        xp[j] += h;
        let mut xm = x.to_vec();
        xm[j] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..m {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}
