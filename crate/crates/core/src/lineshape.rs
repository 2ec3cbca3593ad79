//! Lineshape function g(t), analytically from an exponential BCF and
//! by quadrature from a spectral density.
//!
//! The stored series is the ZPL-centered lineshape
//!
//! ```text
//! g(t) = (1/π) ∫₀^∞ dω J(ω)/ω² ( coth(ω/2T)(1-cos ωt) + i·sin ωt )
//! ```
//!
//! i.e. the double time integral of the BCF with its linear imaginary
//! drift `-iE_λt` removed (`E_λ` the reorganization energy).  With this
//! convention the absorption spectrum `(1/π)Re ∫ e^{iωt} e^{-g(t)} dt`
//! comes out with the zero-phonon line at ω = 0 and no further shifts.

use crate::bcf::ExponentialBCF;
use crate::error::{Error, Result};
use crate::grid::{is_uniform, logspace};
use crate::quadrature::{integrate_adaptive, oscillatory_breakpoints};
use crate::specdens::{reorganization_energy, SpectralDensity};
use crate::special::coth_real;
use crate::threads::par_map_indexed;
use crate::units::kelvin_to_wavenumber;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineshapeSource {
    Analytic,
    Quadrature,
}

/// g(t) sampled on a time grid, with the reorganization energy that was
/// removed as the centering drift.
#[derive(Debug, Clone)]
pub struct LineshapeSeries {
    t_grid: Vec<f64>,
    g: Vec<Complex64>,
    e_lambda: f64,
    source: LineshapeSource,
}

impl LineshapeSeries {
    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.g
    }

    pub fn e_lambda(&self) -> f64 {
        self.e_lambda
    }

    pub fn source(&self) -> LineshapeSource {
        self.source
    }
}

/// The linear drift rate of `Σ_m p_m[(e^{iωt}-1)/(iω)² - t/(iω)]` at
/// large t is `Σ_m i·p_m/ω_m`; its imaginary part is `-E_λ`.  This
/// closed-form reorganization energy must agree with the quadrature of
/// the underlying spectral density when the decomposition is sound.
pub fn closed_form_reorganization_energy(bcf: &ExponentialBCF) -> f64 {
    -bcf.modes()
        .iter()
        .map(|m| (m.amplitude / m.frequency).re)
        .sum::<f64>()
}

/// Exact term-by-term double integral of the exponential BCF, centered.
///
/// Each mode contributes `p·(e^{iωt} - 1 - iωt)/(iω)²`; a Taylor branch
/// covers `|ωt| ≪ 1` where the closed form cancels catastrophically.
pub fn g_from_exponential(bcf: &ExponentialBCF, t_grid: &[f64]) -> LineshapeSeries {
    let e_lambda = closed_form_reorganization_energy(bcf);
    let g = t_grid
        .iter()
        .map(|&t| {
            let mut sum = Complex64::new(0.0, 0.0);
            for m in bcf.modes() {
                let z = Complex64::i() * m.frequency * t;
                let shape = if z.norm() < 1e-2 {
                    // (e^z - 1 - z)/z² = 1/2 + z/6 + z²/24 + z³/120 + z⁴/720 + ...
                    let mut acc = Complex64::new(1.0 / 720.0, 0.0);
                    acc = acc * z + 1.0 / 120.0;
                    acc = acc * z + 1.0 / 24.0;
                    acc = acc * z + 1.0 / 6.0;
                    acc = acc * z + 0.5;
                    acc * t * t
                } else {
                    (z.exp() - 1.0 - z) / (Complex64::i() * m.frequency).powu(2)
                };
                sum += m.amplitude * shape;
            }
            sum + Complex64::i() * e_lambda * t
        })
        .collect();
    LineshapeSeries {
        t_grid: t_grid.to_vec(),
        g,
        e_lambda,
        source: LineshapeSource::Analytic,
    }
}

/// g(t) by quadrature of the defining integral over the spectral
/// density (`T = 0` replaces coth by 1).
///
/// Long uniform grids starting at zero are evaluated through a
/// discretized cosine/sine transform (two FFTs) when the integrand is
/// resolved and regular at the origin; everything else goes through
/// pointwise adaptive quadrature with a 1e-8 relative target.
pub fn g_from_sd_quadrature<S: SpectralDensity + Sync + ?Sized>(
    sd: &S,
    temperature_kelvin: f64,
    t_grid: &[f64],
) -> Result<LineshapeSeries> {
    if !temperature_kelvin.is_finite() || temperature_kelvin < 0.0 {
        return Err(Error::InvalidTemperature(format!(
            "temperature must be nonnegative, got {temperature_kelvin} K"
        )));
    }
    let t_cm = kelvin_to_wavenumber(temperature_kelvin);
    let e_lambda = reorganization_energy(sd)?;

    if t_grid.len() >= 512 && t_grid[0] == 0.0 && is_uniform(t_grid, 1e-9) {
        if let Some(g) = g_fast_uniform(sd, t_cm, t_grid) {
            return Ok(LineshapeSeries {
                t_grid: t_grid.to_vec(),
                g,
                e_lambda,
                source: LineshapeSource::Quadrature,
            });
        }
    }

    let g = par_map_indexed(t_grid.len(), |i| g_pointwise(sd, t_cm, t_grid[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(LineshapeSeries {
        t_grid: t_grid.to_vec(),
        g,
        e_lambda,
        source: LineshapeSource::Quadrature,
    })
}

fn g_pointwise<S: SpectralDensity + ?Sized>(sd: &S, t_cm: f64, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let coth_factor = move |w: f64| if t_cm > 0.0 { coth_real(w / (2.0 * t_cm)) } else { 1.0 };
    let scale = sd.frequency_scale();
    let cut = g_cutoff(sd, scale);
    let bp = oscillatory_breakpoints(0.0, cut, t.abs(), 60_000);

    // 1 - cos(ωt) as 2sin²(ωt/2) keeps the ω → 0 behavior accurate.
    let re_integrand = |w: f64| {
        let s = (0.5 * w * t).sin();
        sd.value(w) / (w * w) * coth_factor(w) * 2.0 * s * s / PI
    };
    let re = integrate_adaptive(re_integrand, &bp, 0.0, 1e-8, 200_000)?;
    let im_integrand = |w: f64| sd.value(w) / (w * w) * (w * t).sin() / PI;
    let im_floor = 1e-10 * re.value.abs().max(1e-300);
    let im = integrate_adaptive(im_integrand, &bp, im_floor, 1e-8, 200_000)?;
    Ok(Complex64::new(re.value, im.value))
}

fn g_cutoff<S: SpectralDensity + ?Sized>(sd: &S, scale: f64) -> f64 {
    let probe = logspace(scale * 1e-4, scale * 1e2, 400);
    let j_max = probe.iter().map(|&w| sd.value(w).abs()).fold(0.0, f64::max);
    let mut cut = 10.0 * scale;
    // J/ω² gains two powers of decay over J, so the J-based cutoff is
    // conservative.
    while sd.value(cut).abs() > 1e-13 * j_max && cut < scale * 1e13 {
        cut *= 2.0;
    }
    cut
}

/// Discretized-transform path: g on all grid points from two FFTs.
///
/// Returns `None` when the integrand is unresolved by the implied
/// frequency grid or singular at the origin (ohmic forms), in which
/// case the caller falls back to pointwise quadrature.
fn g_fast_uniform<S: SpectralDensity + ?Sized>(
    sd: &S,
    t_cm: f64,
    t_grid: &[f64],
) -> Option<Vec<Complex64>> {
    let n = t_grid.len();
    let dt = t_grid[1] - t_grid[0];
    let n_fft = (4 * n).next_power_of_two();
    let d_omega = 2.0 * PI / (n_fft as f64 * dt);
    let omega_max = n_fft as f64 * d_omega;

    let coth_factor = move |w: f64| if t_cm > 0.0 { coth_real(w / (2.0 * t_cm)) } else { 1.0 };
    let c = |w: f64| sd.value(w) / (w * w) * coth_factor(w) / PI;
    let s = |w: f64| sd.value(w) / (w * w) / PI;

    // Regularity at the origin: the split into plain cosine/sine
    // transforms needs both densities bounded there.  Densities that
    // grow as ω shrinks (ohmic forms) are handed back to pointwise
    // quadrature, where the 1-cos factor tames them.
    let eps = d_omega * 1e-4;
    let (c0, s0) = (c(eps), s(eps));
    if !c0.is_finite() || !s0.is_finite() {
        return None;
    }
    if c(eps * 0.5).abs() > 1.5 * c0.abs() + 1e-300 || s(eps * 0.5).abs() > 1.5 * s0.abs() + 1e-300
    {
        return None;
    }
    // Resolution: the densities must have decayed by the folding edge.
    let c_scale = logspace(d_omega, omega_max * 0.5, 200)
        .into_iter()
        .map(|w| c(w).abs())
        .fold(0.0, f64::max);
    let edge = logspace(omega_max * 0.5, omega_max, 50)
        .into_iter()
        .map(|w| c(w).abs().max(s(w).abs()))
        .fold(0.0, f64::max);
    if edge > 1e-9 * c_scale {
        return None;
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n_fft);

    let mut c_buf: Vec<Complex64> = (0..n_fft)
        .map(|j| {
            let w = if j == 0 { eps } else { j as f64 * d_omega };
            Complex64::new(c(w), 0.0)
        })
        .collect();
    let c_total: f64 =
        d_omega * (c_buf.iter().map(|v| v.re).sum::<f64>() - 0.5 * c_buf[0].re - 0.5 * c_buf[n_fft - 1].re);
    let c0_half = 0.5 * c_buf[0].re;
    fft.process(&mut c_buf);

    let mut s_buf: Vec<Complex64> = (0..n_fft)
        .map(|j| {
            let w = if j == 0 { eps } else { j as f64 * d_omega };
            Complex64::new(s(w), 0.0)
        })
        .collect();
    fft.process(&mut s_buf);

    Some(
        (0..n)
            .map(|k| {
                let re = c_total - d_omega * (c_buf[k].re - c0_half);
                let im = d_omega * s_buf[k].im;
                Complex64::new(re, im)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcf::decompose;
    use crate::cothexp::CothExpansion;
    use crate::grid::linspace;
    use crate::specdens::{huang_rhys, FitSDModel, PoleTerm, ReferenceSD};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn table_damped_mode() -> FitSDModel {
        FitSDModel::new(
            5,
            vec![PoleTerm::new(
                1.27e4,
                vec![
                    Complex64::new(183.0, 9.17),
                    Complex64::new(67.6, 178.0),
                    Complex64::new(1.76, 11.1),
                ],
            )
            .unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn single_decaying_mode_closed_form() {
        // p=1, ω=i: g(t) = (e^{-t} - 1) + t, real, drift-free.
        let bcf = crate::bcf::ExponentialBCF::from_json(
            r#"{"modes":[{"p":[1.0,0.0],"w":[0.0,1.0]}],"T_kelvin":0.0,
                "scheme":"zero_temperature","L":0,"model_hash":""}"#,
        )
        .unwrap();
        let grid = linspace(0.0, 20.0, 81);
        let g = g_from_exponential(&bcf, &grid);
        assert_abs_diff_eq!(g.e_lambda(), 0.0, epsilon = 1e-15);
        for (t, v) in grid.iter().zip(g.values()) {
            let want = (-t).exp() - 1.0 + t;
            assert_relative_eq!(v.re, want, max_relative = 1e-12, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
        // g -> t - 1 at large t.
        let last = g.values().last().unwrap();
        assert_relative_eq!(last.re, 20.0 - 1.0, max_relative = 1e-9);
    }

    #[test]
    fn g_vanishes_at_time_zero() {
        let model = table_damped_mode();
        let bcf = decompose(&model, &CothExpansion::pade(2).unwrap(), 77.0).unwrap();
        let g = g_from_exponential(&bcf, &[0.0]);
        assert_eq!(g.values()[0], Complex64::new(0.0, 0.0));
        let gq = g_from_sd_quadrature(&model, 77.0, &[0.0]).unwrap();
        assert_eq!(gq.values()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn analytic_agrees_with_quadrature_for_damped_mode() {
        let model = table_damped_mode();
        let bcf = decompose(&model, &CothExpansion::pade(2).unwrap(), 77.0).unwrap();
        let grid = linspace(0.0, 0.2, 41);
        let ga = g_from_exponential(&bcf, &grid);
        let gq = g_from_sd_quadrature(&model, 77.0, &grid).unwrap();
        let scale = gq.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, q) in ga.values().iter().zip(gq.values()) {
            assert!((a - q).norm() <= 1e-3 * scale, "{a} vs {q}");
        }
    }

    #[test]
    fn closed_form_drift_matches_quadrature_reorganization_energy() {
        let model = table_damped_mode();
        let bcf = decompose(&model, &CothExpansion::pade(3).unwrap(), 77.0).unwrap();
        let analytic = closed_form_reorganization_energy(&bcf);
        let quad = reorganization_energy(&model).unwrap();
        assert_relative_eq!(analytic, quad, max_relative = 1e-6);
    }

    #[test]
    fn linearity_in_modes() {
        let model = table_damped_mode();
        let bcf = decompose(&model, &CothExpansion::pade(2).unwrap(), 300.0).unwrap();
        let scaled = decompose(&model.scaled(2.0).unwrap(), &CothExpansion::pade(2).unwrap(), 300.0)
            .unwrap();
        let grid = linspace(0.0, 0.1, 11);
        let g1 = g_from_exponential(&bcf, &grid);
        let g2 = g_from_exponential(&scaled, &grid);
        for (a, b) in g1.values().iter().zip(g2.values()) {
            assert_relative_eq!(b.re, 2.0 * a.re, max_relative = 1e-12, epsilon = 1e-14);
            assert_relative_eq!(b.im, 2.0 * a.im, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn quadrature_scales_linearly_in_the_density() {
        let sd = ReferenceSD::LogNormal { s: 0.3, sigma: 0.7, omega_c: 38.0 };
        let grid = [0.0, 0.05, 0.15];
        let g1 = g_from_sd_quadrature(&sd, 77.0, &grid).unwrap();
        let g2 = g_from_sd_quadrature(&sd.scaled(3.0), 77.0, &grid).unwrap();
        for (a, b) in g1.values().iter().zip(g2.values()) {
            assert_relative_eq!(b.re, 3.0 * a.re, max_relative = 1e-7, epsilon = 1e-12);
            assert_relative_eq!(b.im, 3.0 * a.im, max_relative = 1e-7, epsilon = 1e-12);
        }
    }

    #[test]
    fn t0_log_normal_real_part_saturates_at_huang_rhys() {
        // From the 1-cos form: Re g(∞) = X = S at zero temperature.
        let sd = ReferenceSD::LogNormal { s: 0.3, sigma: 0.7, omega_c: 38.0 };
        let x = huang_rhys(&sd).unwrap();
        let g = g_from_sd_quadrature(&sd, 0.0, &[5.0, 8.0]).unwrap();
        for v in g.values() {
            assert_relative_eq!(v.re, x, max_relative = 1e-3);
        }
        assert_relative_eq!(x, 0.3, max_relative = 1e-6);
    }

    #[test]
    fn real_part_nonnegative() {
        let model = table_damped_mode();
        let bcf = decompose(&model, &CothExpansion::pade(11).unwrap(), 4.0).unwrap();
        let grid = linspace(0.0, 1.0, 201);
        let g = g_from_exponential(&bcf, &grid);
        assert!(g.values().iter().all(|v| v.re >= -1e-10));
    }

    #[test]
    fn second_difference_recovers_bcf_with_quadratic_convergence() {
        let model = table_damped_mode();
        let bcf = decompose(&model, &CothExpansion::pade(2).unwrap(), 77.0).unwrap();
        let t0 = 0.013;
        let alpha = bcf.evaluate(t0).unwrap();
        let second_diff = |h: f64| {
            let g = g_from_exponential(&bcf, &[t0 - h, t0, t0 + h]);
            let v = g.values();
            // The centering drift is linear in t and cancels here.
            (v[0] - 2.0 * v[1] + v[2]) / (h * h)
        };
        let e1 = (second_diff(2e-4) - alpha).norm();
        let e2 = (second_diff(1e-4) - alpha).norm();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() <= 0.5, "convergence ratio {ratio}");
    }

    #[test]
    fn fast_uniform_path_matches_pointwise() {
        let sd = ReferenceSD::LogNormal { s: 0.3, sigma: 0.7, omega_c: 38.0 };
        let n = 2048usize;
        let dt = 1e-3;
        let grid: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let t_cm = kelvin_to_wavenumber(77.0);
        let fast = g_fast_uniform(&sd, t_cm, &grid).expect("transform path should engage here");
        // Spot-check against pointwise adaptive values.
        for &k in &[1usize, 17, 256, 1023, 2047] {
            let point = g_pointwise(&sd, t_cm, grid[k]).unwrap();
            let v = fast[k];
            assert!(
                (v - point).norm() <= 1e-6 * (1.0 + point.norm()),
                "k={k}: fast {v} vs pointwise {point}"
            );
        }
        // An ohmic density must decline the transform path.
        let dl = ReferenceSD::DrudeLorentz { lambda: 1.0, gamma: 50.0 };
        assert!(g_fast_uniform(&dl, t_cm, &grid).is_none());
    }
}
