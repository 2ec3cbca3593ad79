//! Dense Levenberg-Marquardt for small parameter counts.
//!
//! Damped normal equations with Marquardt diagonal scaling, solved by
//! Cholesky factorization.  Only improving steps are accepted, so the
//! recorded cost history is nonincreasing.

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative decrease of the cost below which iteration stops.
    pub cost_tolerance: f64,
    /// Infinity norm of the gradient below which iteration stops.
    pub gradient_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 200, cost_tolerance: 1e-10, gradient_tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Final cost `Σ r_i²`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

/// Minimize `Σ r_i(x)²` given the residual vector and its row-major
/// `m×n` Jacobian.
pub fn minimize<R, J>(residuals: R, jacobian: J, x0: &[f64], opts: &LmOptions) -> LmOutcome
where
    R: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Vec<f64>,
{
    minimize_bounded(residuals, jacobian, x0, None, opts)
}

/// [`minimize`] with box constraints: steps are clamped into
/// `[lower, upper]` componentwise before evaluation.  Keeps weakly
/// identified parameters (dead poles of an over-parametrized fit) from
/// running off to infinity.
pub fn minimize_bounded<R, J>(
    residuals: R,
    jacobian: J,
    x0: &[f64],
    bounds: Option<(&[f64], &[f64])>,
    opts: &LmOptions,
) -> LmOutcome
where
    R: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Vec<f64>,
{
    let clamp = |x: &mut Vec<f64>| {
        if let Some((lo, hi)) = bounds {
            for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
                *v = v.clamp(l, h);
            }
        }
    };
    let n = x0.len();
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = residuals(&x);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut history = vec![cost];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&x);
        let m = jac.len() / n;
        debug_assert_eq!(jac.len(), m * n);

        // g = Jᵀr, a = JᵀJ (upper triangle).
        let mut g = vec![0.0; n];
        let mut a = vec![0.0; n * n];
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            for p in 0..n {
                g[p] += row[p] * r[i];
                for q in p..n {
                    a[p * n + q] += row[p] * row[q];
                }
            }
        }
        let g_inf = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if g_inf <= opts.gradient_tolerance * (1.0 + cost) {
            converged = true;
            break;
        }
        let max_diag = (0..n).map(|p| a[p * n + p]).fold(0.0f64, f64::max).max(1e-300);

        let mut accepted = false;
        for _ in 0..25 {
            // (JᵀJ + λ·diag)δ = -g with a floored Marquardt diagonal.
            let mut damped = a.clone();
            for p in 0..n {
                let d = a[p * n + p].max(1e-12 * max_diag);
                damped[p * n + p] += lambda * d;
            }
            let step = match cholesky_solve(&mut damped, &g, n) {
                Some(mut s) => {
                    s.iter_mut().for_each(|v| *v = -*v);
                    s
                }
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut x_new: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + si).collect();
            clamp(&mut x_new);
            let r_new = residuals(&x_new);
            let cost_new: f64 = r_new.iter().map(|v| v * v).sum();
            if cost_new.is_finite() && cost_new < cost {
                let rel_drop = (cost - cost_new) / cost.max(1e-300);
                x = x_new;
                r = r_new;
                cost = cost_new;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-14);
                accepted = true;
                if rel_drop <= opts.cost_tolerance {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted || converged {
            converged = converged || !accepted && g_inf <= 1e-6 * (1.0 + cost);
            break;
        }
    }

    LmOutcome { params: x, cost, iterations, converged, cost_history: history }
}

/// In-place Cholesky solve of the symmetric system stored in the upper
/// triangle of `a`; returns `None` if the matrix is not positive
/// definite.
fn cholesky_solve(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    // Factor A = LLᵀ, writing L into the lower triangle.
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let l_jj = d.sqrt();
        a[j * n + j] = l_jj;
        for i in j + 1..n {
            let mut s = a[j * n + i]; // upper-triangle entry (j,i)
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l_jj;
        }
    }
    // Forward and back substitution.
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = a[i * n + k] * y[k];
            y[i] -= t;
        }
        y[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = a[k * n + i] * y[k];
            y[i] -= t;
        }
        y[i] /= a[i * n + i];
    }
    Some(y)
}
