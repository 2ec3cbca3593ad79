//! Special functions on the positive real axis and stable complex coth.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the power series and the asymptotic expansion of Ei.
const EI_SERIES_CUTOFF: f64 = 40.0;

/// Exponential integral Ei(x) for x > 0.
///
/// Power series `γ + ln x + Σ xᵏ/(k·k!)` up to the crossover, asymptotic
/// expansion `eˣ/x · Σ k!/xᵏ` (truncated at its smallest term) above.
/// Relative accuracy is better than 1e-10 over the whole positive axis.
pub fn expint_ei(x: f64) -> f64 {
    assert!(x > 0.0, "expint_ei is defined on the positive real axis");
    if x <= EI_SERIES_CUTOFF {
        ei_series(x)
    } else {
        ei_asymptotic_scaled(x) * x.exp()
    }
}

/// `e^{-x}·Ei(x)` for x > 0 without overflow at large x.
pub fn expint_ei_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "expint_ei_scaled is defined on the positive real axis");
    if x <= EI_SERIES_CUTOFF {
        ei_series(x) * (-x).exp()
    } else {
        ei_asymptotic_scaled(x)
    }
}

fn ei_series(x: f64) -> f64 {
    // All terms are positive for x > 0, no cancellation.
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..500 {
        term *= x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib < 1e-17 * sum.abs() && k as f64 > x {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// `e^{-x}·Ei(x) ≈ (1/x)·Σ k!/xᵏ`, truncated at the smallest term.
fn ei_asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / x
}

/// Hyperbolic cotangent of a real argument, stable for tiny |x|.
pub fn coth_real(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Hyperbolic cotangent of a complex argument.
///
/// Uses `(1 + e^{-2z})/(1 - e^{-2z})` for `Re z > 0` and the mirrored
/// form otherwise, so large |Re z| underflows to ±1 instead of
/// overflowing in cosh/sinh.
pub fn coth_complex(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        let e = (-2.0 * z).exp();
        (1.0 + e) / (1.0 - e)
    } else {
        let e = (2.0 * z).exp();
        -(1.0 + e) / (1.0 - e)
    }
}

/// Distance from `z` to the nearest pole of coth (the points `iπk`).
pub fn coth_pole_distance(z: Complex64) -> f64 {
    let k = (z.im / std::f64::consts::PI).round();
    (z - Complex64::new(0.0, k * std::f64::consts::PI)).norm()
}
