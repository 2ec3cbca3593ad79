//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 7/15-point Gauss–Kronrod rule drives a global-error adaptive
//! bisection over a caller-seeded partition.  Oscillatory integrands are
//! handled by seeding one panel per half-period so each panel stays
//! smooth for the rule.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// 15-point Kronrod abscissae on [0, 1] side (symmetric rule).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];

/// 7-point Gauss weights.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod weights.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// One Gauss–Kronrod evaluation of `f` over `[a, b]`.
///
/// Returns `(integral, error_estimate)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    let mut fv = [0.0f64; 15];
    fv[7] = f_center;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let value = res_kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Adaptively integrate `f` over the partition given by `breakpoints`.
///
/// `breakpoints` must be strictly increasing; each consecutive pair seeds
/// one panel.  Bisection continues on the worst panel until the summed
/// error estimate satisfies `max(abs_tol, rel_tol·|value|)` or
/// `max_panels` is reached, in which case the achieved estimate is
/// reported in the error.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breakpoints.windows(2) {
        assert!(w[1] > w[0], "breakpoints must be strictly increasing");
        let (v, e) = gauss_kronrod_15(&f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Interval { a: w[0], b: w[1], value: v, error: e });
    }

    let tolerance = |value: f64| abs_tol.max(rel_tol * value.abs());
    while total_err > tolerance(total) {
        if heap.len() >= max_panels {
            return Err(Error::QuadratureNoConvergence {
                achieved: total_err,
                required: tolerance(total),
            });
        }
        let worst = heap.pop().expect("heap cannot be empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Panel is at floating-point resolution; error cannot shrink.
            return Err(Error::QuadratureNoConvergence {
                achieved: total_err,
                required: tolerance(total),
            });
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, error: e2 });
    }
    Ok(Quadrature { value: total, error: total_err })
}

/// Breakpoints for `[lo, hi]` with one panel per half-period of
/// `e^{iωt}` (width `π/t_scale`), decade-seeded when not oscillatory.
///
/// The panel count is capped; the adaptive driver refines further where
/// needed.
pub fn oscillatory_breakpoints(lo: f64, hi: f64, t_scale: f64, max_seed: usize) -> Vec<f64> {
    assert!(hi > lo);
    let mut pts = vec![lo];
    // Decade seeds help integrands with structure spread over scales.
    let mut d = if lo > 0.0 { lo } else { hi * 1e-8 };
    while d < hi {
        if d > lo {
            pts.push(d);
        }
        d *= 10.0;
    }
    if t_scale > 0.0 {
        let width = std::f64::consts::PI / t_scale;
        let n = ((hi - lo) / width).ceil() as usize;
        if n >= 2 {
            let stride = n.div_ceil(max_seed).max(1);
            let mut k = stride;
            while (k as f64) * width < hi - lo {
                pts.push(lo + k as f64 * width);
                k += stride;
            }
        }
    }
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-300 || (*a - *b).abs() < 1e-13 * b.abs());
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        // GK15 integrates degree-13 polynomials exactly.
        let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(9) - 3.0 * x.powi(4), 0.0, 2.0);
        let exact = 2.0f64.powi(10) / 10.0 - 3.0 * 2.0f64.powi(5) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // Lorentzian with narrow width integrates to pi (over full line, ~pi here).
        let g = 1e-3;
        let f = |x: f64| g / (x * x + g * g);
        let q = integrate_adaptive(f, &[0.0, 1.0, 10.0, 1e4], 0.0, 1e-10, 10_000).unwrap();
        let exact = (1e4f64 / g).atan();
        assert_relative_eq!(q.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn oscillatory_integral() {
        // ∫_0^X sin(ωt)/ω dω -> Si(X t); take t=40, X=50 and compare to
        // a fine straightforward reference computed with many panels.
        let t = 40.0;
        let f = |w: f64| if w == 0.0 { t } else { (w * t).sin() / w };
        let bp = oscillatory_breakpoints(0.0, 50.0, t, 100_000);
        let q = integrate_adaptive(f, &bp, 1e-12, 1e-10, 100_000).unwrap();
        // Si(2000) from mpmath
        assert_relative_eq!(q.value, 1.570_979_823_968_055, max_relative = 1e-8);
    }

    #[test]
    fn nonconvergence_is_reported() {
        // A genuinely non-integrable endpoint singularity cannot converge.
        let f = |x: f64| 1.0 / x;
        let err = integrate_adaptive(f, &[0.0, 1.0], 1e-12, 1e-12, 64).unwrap_err();
        match err {
            Error::QuadratureNoConvergence { achieved, .. } => assert!(achieved > 0.0),
            other => panic!("expected QuadratureNoConvergence, got {other:?}"),
        }
    }
}
