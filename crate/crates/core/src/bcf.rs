//! Exponential decomposition of the bath correlation function and its
//! brute-force quadrature oracle.
//!
//! The bath correlation function of a spectral density `J` at
//! temperature `T` is
//!
//! ```text
//! α(t) = (1/π) ∫₀^∞ dω J(ω) (coth(ω/2T)·cos(ωt) - i·sin(ωt)).
//! ```
//!
//! For the pole-product fit family the integral is evaluated exactly by
//! closing the contour in the upper half plane, once the coth is
//! replaced by a finite pole expansion.  Writing `α = a + ib` and
//! treating the two residue sums separately keeps every cancellation
//! explicit:
//!
//! * `b(t)` picks up only the spectral-density poles:
//!   `b⁺ = -p_k ω_j^{n-1} R_j` at `ω_j` and its conjugate partner at
//!   `-ω_j*`, where `R_j` is the residue of the pole product.
//! * `a(t)` multiplies those residues by the exact `coth(ω_j/2T)` and
//!   adds one decaying mode per expansion pole `w_ℓ = 2T ξ_ℓ` with
//!   amplitude `i·J(w_ℓ)·2T·η_ℓ` (the residue of `C(ω/2T)` in `ω`).
//!
//! The `1/x` head of the expansion never contributes: `J(ω)/ω` is
//! regular at the origin for every valid model.

use crate::cothexp::{CothExpansion, CothScheme};
use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::quadrature::{integrate_adaptive, oscillatory_breakpoints};
use crate::specdens::{FitSDModel, SpectralDensity};
use crate::special::{coth_complex, coth_pole_distance, coth_real};
use crate::threads::par_map_indexed;
use crate::units::kelvin_to_wavenumber;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One exponential mode `p·e^{iωt}` with `Im ω > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcfMode {
    pub amplitude: Complex64,
    pub frequency: Complex64,
}

/// Where a decomposition came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcfProvenance {
    pub model_hash: String,
    pub scheme: CothScheme,
    pub expansion_terms: usize,
}

/// A bath correlation function as a finite sum of decaying exponentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialBCF {
    modes: Vec<BcfMode>,
    temperature_kelvin: f64,
    source: BcfProvenance,
}

#[derive(Serialize, Deserialize)]
struct RawBcf {
    modes: Vec<RawMode>,
    #[serde(rename = "T_kelvin")]
    t_kelvin: f64,
    scheme: CothScheme,
    #[serde(rename = "L")]
    l: usize,
    model_hash: String,
}

#[derive(Serialize, Deserialize)]
struct RawMode {
    p: [f64; 2],
    w: [f64; 2],
}

impl ExponentialBCF {
    pub fn modes(&self) -> &[BcfMode] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn temperature_kelvin(&self) -> f64 {
        self.temperature_kelvin
    }

    pub fn provenance(&self) -> &BcfProvenance {
        &self.source
    }

    /// `α(0) = Σ p_m`.
    pub fn amplitude_sum(&self) -> Complex64 {
        self.modes.iter().map(|m| m.amplitude).sum()
    }

    /// `Σ p_m e^{iω_m t}` for `t ≥ 0`; negative times are rejected,
    /// use [`Self::evaluate_symmetric`].
    pub fn evaluate(&self, t: f64) -> Result<Complex64> {
        if t < 0.0 {
            return Err(Error::InvalidInput(format!(
                "the exponential form holds for t >= 0, got t = {t}; \
                 use evaluate_symmetric for negative times"
            )));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.amplitude * (Complex64::i() * m.frequency * t).exp())
            .sum()
    }

    /// Extension to the whole time axis via `α(-t) = α(t)*`.
    pub fn evaluate_symmetric(&self, t: f64) -> Complex64 {
        if t >= 0.0 {
            self.eval_unchecked(t)
        } else {
            self.eval_unchecked(-t).conj()
        }
    }

    /// Envelope `Σ|p_m| e^{-min_m(Im ω_m)·t}` bounding `|α(t)|`.
    pub fn decay_bound(&self, t: f64) -> f64 {
        let total: f64 = self.modes.iter().map(|m| m.amplitude.norm()).sum();
        let gamma_min = self
            .modes
            .iter()
            .map(|m| m.frequency.im)
            .fold(f64::INFINITY, f64::min);
        total * (-gamma_min * t).exp()
    }

    pub fn to_json(&self) -> String {
        let raw = RawBcf {
            modes: self
                .modes
                .iter()
                .map(|m| RawMode {
                    p: [m.amplitude.re, m.amplitude.im],
                    w: [m.frequency.re, m.frequency.im],
                })
                .collect(),
            t_kelvin: self.temperature_kelvin,
            scheme: self.source.scheme,
            l: self.source.expansion_terms,
            model_hash: self.source.model_hash.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("bcf serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: RawBcf = serde_json::from_str(json)
            .map_err(|e| Error::InvalidInput(format!("bad exponential-BCF JSON: {e}")))?;
        let modes: Vec<BcfMode> = raw
            .modes
            .iter()
            .map(|m| BcfMode {
                amplitude: Complex64::new(m.p[0], m.p[1]),
                frequency: Complex64::new(m.w[0], m.w[1]),
            })
            .collect();
        for m in &modes {
            if m.frequency.im <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "mode frequency {} does not decay (needs Im > 0)",
                    m.frequency
                )));
            }
        }
        Ok(Self {
            modes,
            temperature_kelvin: raw.t_kelvin,
            source: BcfProvenance {
                model_hash: raw.model_hash,
                scheme: raw.scheme,
                expansion_terms: raw.l,
            },
        })
    }
}

/// Analytic decomposition of the bath correlation function of `model`
/// at `temperature_kelvin` using the coth expansion `coth`.
///
/// Finite-temperature schemes need `T > 0`; the zero-temperature scheme
/// accepts any `T ≥ 0` (a nonzero value is ignored with a warning).
/// The mode list contains two modes per spectral-density pole followed
/// by one mode per expansion pole, `M = 2κ + L` in total.
pub fn decompose(
    model: &FitSDModel,
    coth: &CothExpansion,
    temperature_kelvin: f64,
) -> Result<ExponentialBCF> {
    let zero_t = coth.scheme() == CothScheme::ZeroTemperature;
    if !temperature_kelvin.is_finite() || temperature_kelvin < 0.0 {
        return Err(Error::InvalidTemperature(format!(
            "temperature must be finite and nonnegative, got {temperature_kelvin} K"
        )));
    }
    if !zero_t && temperature_kelvin == 0.0 {
        return Err(Error::InvalidTemperature(
            "T = 0 needs the zero-temperature scheme; finite-temperature \
             expansions have poles at 2Tξ which collapse onto the real axis"
                .into(),
        ));
    }
    if zero_t && temperature_kelvin > 0.0 {
        log::warn!(
            "zero-temperature scheme at T = {temperature_kelvin} K: \
             coth is replaced by 1, thermal occupation is ignored"
        );
    }

    let t_cm = kelvin_to_wavenumber(temperature_kelvin);
    let n = model.low_freq_exponent();

    // Mapped expansion poles and the collision guard.
    let mapped: Vec<(Complex64, f64)> = coth
        .terms()
        .iter()
        .map(|t| (2.0 * t_cm * t.pole, t.residue))
        .collect();
    if !zero_t {
        let eps_pole = 1e-6 * (2.0 * t_cm * PI);
        for term in model.terms() {
            for &pole in term.poles() {
                for (w, _) in &mapped {
                    if (pole - w).norm() < eps_pole || (-pole.conj() - w).norm() < eps_pole {
                        return Err(Error::PoleCollision(format!(
                            "spectral-density pole {pole} lies within {eps_pole:.3e} of \
                             expansion pole {w}; the residue sum is ill-conditioned"
                        )));
                    }
                }
            }
        }
        let gamma_min = model
            .terms()
            .iter()
            .flat_map(|t| t.poles().iter())
            .map(|p| p.im)
            .fold(f64::INFINITY, f64::min);
        if 2.0 * PI * t_cm < gamma_min {
            log::warn!(
                "first thermal pole 2πT = {:.3} cm^-1 lies below the narrowest \
                 spectral-density pole width {:.3} cm^-1; expect to need a large \
                 expansion order",
                2.0 * PI * t_cm,
                gamma_min
            );
        }
    }

    let mut modes = Vec::with_capacity(2 * model.total_pole_count() + mapped.len());
    for term in model.terms() {
        let poles = term.poles();
        for (j, &pole) in poles.iter().enumerate() {
            // Residue of the pole product at this pole.
            let mut residue = (pole - pole.conj()).inv();
            for (i, &other) in poles.iter().enumerate() {
                if i != j {
                    residue *= ((pole - other) * (pole - other.conj())).inv();
                }
            }
            let b_plus = -term.weight() * pole.powu(n - 1) * residue;

            let (p_plus, p_minus) = if zero_t {
                (Complex64::new(0.0, 0.0), 2.0 * Complex64::i() * b_plus.conj())
            } else {
                let a_plus = -Complex64::i() * b_plus * coth_at_pole(pole / (2.0 * t_cm))?;
                (
                    a_plus + Complex64::i() * b_plus,
                    a_plus.conj() + Complex64::i() * b_plus.conj(),
                )
            };
            modes.push(BcfMode { amplitude: p_plus, frequency: pole });
            modes.push(BcfMode { amplitude: p_minus, frequency: -pole.conj() });
        }
    }
    for (w, eta) in &mapped {
        // Residue of C(ω/2T) in ω is 2T·η.
        let amplitude = Complex64::i() * model.evaluate_complex(*w) * (2.0 * t_cm * eta);
        modes.push(BcfMode { amplitude, frequency: *w });
    }

    Ok(ExponentialBCF {
        modes,
        temperature_kelvin,
        source: BcfProvenance {
            model_hash: model.canonical_hash(),
            scheme: coth.scheme(),
            expansion_terms: coth.term_count(),
        },
    })
}

/// Exact coth at a mapped spectral-density pole, with guards.
///
/// Far right of the imaginary axis coth is 1 to better than 1e-17, so
/// the phase (which f64 cannot resolve for astronomically large
/// arguments) never enters.  Near the axis a pole of coth within 1e-8,
/// or an argument too large for reliable range reduction, is a
/// collision.
fn coth_at_pole(arg: Complex64) -> Result<Complex64> {
    if arg.re >= 20.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if arg.im.abs() >= 1e12 {
        return Err(Error::PoleCollision(format!(
            "cannot resolve coth at {arg}: the phase of a pole this far from the \
             real axis is numerically meaningless at this temperature"
        )));
    }
    if coth_pole_distance(arg) < 1e-8 {
        return Err(Error::PoleCollision(format!(
            "ω/2T = {arg} sits on a pole of coth"
        )));
    }
    Ok(coth_complex(arg))
}

/// Oscillation-aware truncation point: beyond the returned frequency
/// the remaining contribution is below `budget` (van der Corput bound
/// `2·env/t` for `t > 0`, measured-slope tail estimate at `t = 0`).
fn truncation_frequency<S: SpectralDensity + ?Sized>(
    sd: &S,
    coth_factor: &impl Fn(f64) -> f64,
    t: f64,
    budget: f64,
) -> f64 {
    let scale = sd.frequency_scale();
    let mut x = 20.0 * scale; // past the structured region before bounding
    while x < scale * 1e13 {
        let env = sd.value(x).abs() * coth_factor(x).abs().max(1.0) / PI;
        let tail = if t > 0.0 {
            // van der Corput: |∫_x^∞ f cos(ωt) dω| <= 2 f(x)/t for a
            // monotone envelope.
            2.0 * env / t
        } else {
            // Local power law: ∫_x^∞ env ≈ env·x/(-1-s) for s < -1.
            let e2 = sd.value(2.0 * x).abs() * coth_factor(2.0 * x).abs().max(1.0) / PI;
            if e2 == 0.0 {
                0.0
            } else {
                let s = (e2 / env).ln() / std::f64::consts::LN_2;
                if s < -1.05 {
                    env * x / (-1.0 - s)
                } else {
                    f64::INFINITY
                }
            }
        };
        if tail <= budget || env == 0.0 {
            return x;
        }
        x *= 2.0;
    }
    x
}

/// Quadrature of the defining integral, `abs_tol` per real/imaginary
/// component.  `t_cm = 0` evaluates the `coth → 1` zero-temperature
/// limit.
fn bcf_quadrature_raw<S: SpectralDensity + ?Sized>(
    sd: &S,
    t_cm: f64,
    t: f64,
    abs_tol: f64,
) -> Result<Complex64> {
    let coth_factor = move |w: f64| if t_cm > 0.0 { coth_real(w / (2.0 * t_cm)) } else { 1.0 };

    let cut_re = truncation_frequency(sd, &coth_factor, t.abs(), 0.2 * abs_tol);
    let bp_re = oscillatory_breakpoints(0.0, cut_re, t.abs(), 60_000);
    let re = integrate_adaptive(
        |w| sd.value(w) * coth_factor(w) * (w * t).cos() / PI,
        &bp_re,
        abs_tol,
        0.0,
        200_000,
    )?;

    let one = |_: f64| 1.0;
    let cut_im = truncation_frequency(sd, &one, t.abs(), 0.2 * abs_tol);
    let bp_im = oscillatory_breakpoints(0.0, cut_im, t.abs(), 60_000);
    let im = integrate_adaptive(
        |w| -sd.value(w) * (w * t).sin() / PI,
        &bp_im,
        abs_tol,
        0.0,
        200_000,
    )?;
    Ok(Complex64::new(re.value, im.value))
}

/// Exact bath correlation function by adaptive quadrature with an
/// explicit absolute tolerance (per component).
pub fn exact_bcf_with_tolerance<S: SpectralDensity + Sync + ?Sized>(
    sd: &S,
    temperature_kelvin: f64,
    ts: &[f64],
    abs_tol: f64,
) -> Result<Vec<Complex64>> {
    if !temperature_kelvin.is_finite() || temperature_kelvin < 0.0 {
        return Err(Error::InvalidTemperature(format!(
            "temperature must be nonnegative, got {temperature_kelvin} K"
        )));
    }
    let t_cm = kelvin_to_wavenumber(temperature_kelvin);
    let results = par_map_indexed(ts.len(), |i| bcf_quadrature_raw(sd, t_cm, ts[i], abs_tol));
    results.into_iter().collect()
}

/// Exact bath correlation function on a time grid; the tolerance is
/// `1e-8` scaled by `|α(0)|`.
pub fn exact_bcf_grid<S: SpectralDensity + Sync + ?Sized>(
    sd: &S,
    temperature_kelvin: f64,
    ts: &[f64],
) -> Result<Vec<Complex64>> {
    if !temperature_kelvin.is_finite() || temperature_kelvin < 0.0 {
        return Err(Error::InvalidTemperature(format!(
            "temperature must be nonnegative, got {temperature_kelvin} K"
        )));
    }
    let t_cm = kelvin_to_wavenumber(temperature_kelvin);
    // α(0) is real and non-oscillatory.  A log-grid trapezoid sets the
    // order of magnitude, a quadrature pass refines it, and 1e-8 of the
    // result becomes the per-point absolute target.
    let scale = sd.frequency_scale();
    let coth_factor = |w: f64| if t_cm > 0.0 { coth_real(w / (2.0 * t_cm)) } else { 1.0 };
    let probe = logspace(scale * 1e-7, scale * 1e3, 2000);
    let mut rough = 0.0;
    for pair in probe.windows(2) {
        let f0 = sd.value(pair[0]).abs() * coth_factor(pair[0]);
        let f1 = sd.value(pair[1]).abs() * coth_factor(pair[1]);
        rough += 0.5 * (pair[1] - pair[0]) * (f0 + f1) / PI;
    }
    let alpha0 = bcf_quadrature_raw(sd, t_cm, 0.0, 1e-8 * rough.max(f64::MIN_POSITIVE))?;
    let abs_tol = 1e-8 * alpha0.norm().max(f64::MIN_POSITIVE);
    exact_bcf_with_tolerance(sd, temperature_kelvin, ts, abs_tol)
}

/// Single-point convenience wrapper around [`exact_bcf_grid`].
pub fn exact_bcf<S: SpectralDensity + Sync + ?Sized>(
    sd: &S,
    temperature_kelvin: f64,
    t: f64,
) -> Result<Complex64> {
    Ok(exact_bcf_grid(sd, temperature_kelvin, &[t])?[0])
}
