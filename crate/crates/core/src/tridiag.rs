//! Eigenvalues of real symmetric tridiagonal matrices.
//!
//! Implicit-shift QL iteration (EISPACK `imtql1` lineage), eigenvalues
//! only.  The matrices built for the coth pole expansions are
//! tridiagonal with zero diagonal, so no reduction step is needed.

use crate::error::{Error, Result};

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and subdiagonal `off` (`off.len() == diag.len() - 1`), ascending.
///
/// The iteration budget is `30 · dim` QL sweeps in total; exceeding it
/// reports non-convergence.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1), "subdiagonal must have dim-1 entries");
    let mut d = diag.to_vec();
    if n <= 1 {
        return Ok(d);
    }
    // e is padded so e[n-1] exists as a zero sentinel.
    let mut e = off.to_vec();
    e.push(0.0);

    let budget = 30 * n;
    let mut sweeps = 0usize;

    for l in 0..n {
        loop {
            // Find a negligible subdiagonal element e[m].
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > budget {
                return Err(Error::EigenNoConvergence(budget));
            }

            // Wilkinson shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Underflow: recover by annihilating this entry.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if i == l {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }

    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Strictly positive eigenvalues, ascending, of the zero-diagonal
/// tridiagonal matrix with subdiagonal `off`.
///
/// Such spectra are symmetric about zero; entries within `1e-12` of the
/// largest magnitude times machine-level noise are treated as the zero
/// eigenvalue of odd-dimension matrices and dropped.
pub fn positive_eigenvalues_zero_diagonal(off: &[f64]) -> Result<Vec<f64>> {
    let n = off.len() + 1;
    let eigenvalues = symmetric_tridiagonal_eigenvalues(&vec![0.0; n], off)?;
    let scale = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(eigenvalues.into_iter().filter(|&v| v > 1e-12 * scale).collect())
}
