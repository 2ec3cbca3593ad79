//! Small grid and summation helpers.

/// `count` points spaced linearly over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "linspace needs at least two points");
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// `count` points spaced logarithmically over `[lo, hi]`, `lo > 0`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo, "logspace needs 0 < lo < hi");
    let (llo, lhi) = (lo.ln(), hi.ln());
    linspace(llo, lhi, count).into_iter().map(f64::exp).collect()
}

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid_uniform(y: &[f64], dx: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    dx * (0.5 * (y[0] + y[y.len() - 1]) + inner)
}

/// Trapezoid rule on an arbitrary strictly increasing grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Whether a grid is uniform to relative tolerance `tol` on the step.
pub fn is_uniform(x: &[f64], tol: f64) -> bool {
    if x.len() < 2 {
        return true;
    }
    let h = x[1] - x[0];
    if h <= 0.0 {
        return false;
    }
    x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= tol * h.abs())
}
