//! Spectral densities: the pole-product fit family and analytic
//! reference forms.
//!
//! The fit family is
//!
//! ```text
//! J(ω) = ω^{n-1} Σ_k p_k (J_k(ω) - J_k(-ω)),
//! J_k(ω) = Π_j 1/((ω - ω_j)(ω - ω_j*)),    ω_j = Ω_j + iγ_j,  Ω_j, γ_j > 0
//! ```
//!
//! with odd `n`.  Odd `n` makes `J` antisymmetric and real on the real
//! axis and scales as `ωⁿ` at the origin; the term with the fewest
//! poles sets the `ω^{n-2κ-2}` falloff at infinity.

use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::quadrature::integrate_adaptive;
use crate::special::expint_ei_scaled;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

const SQRT_TAU: f64 = 2.5066282746310002; // sqrt(2π)

/// One weighted pole product of the fit family.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    weight: f64,
    poles: Vec<Complex64>,
}

impl PoleTerm {
    /// A term with prefactor `weight > 0` and poles in the upper-right
    /// quadrant (`Re > 0`, `Im > 0`), pairwise distinct.
    pub fn new(weight: f64, poles: Vec<Complex64>) -> Result<Self> {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "term prefactor must be positive and finite, got {weight}"
            )));
        }
        if poles.is_empty() {
            return Err(Error::InvalidInput("term must contain at least one pole".into()));
        }
        for (i, w) in poles.iter().enumerate() {
            if !(w.re > 0.0 && w.im > 0.0) || !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "pole {i} = {w} must have positive real and imaginary parts"
                )));
            }
            for (j, v) in poles.iter().enumerate().take(i) {
                let scale = 1.0f64.max(w.norm() + v.norm());
                if (w - v).norm() <= 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "poles {j} and {i} coincide at {w}; only simple poles are allowed"
                    )));
                }
            }
        }
        Ok(Self { weight, poles })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// `J_k(z) = Π_j 1/((z - ω_j)(z - ω_j*))`.
    pub fn pole_product(&self, z: Complex64) -> Complex64 {
        let mut denom = Complex64::new(1.0, 0.0);
        for w in &self.poles {
            denom *= (z - w) * (z - w.conj());
        }
        denom.inv()
    }
}

/// The fit family: odd low-frequency exponent and weighted pole terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct FitSDModel {
    low_freq_exponent: u32,
    terms: Vec<PoleTerm>,
}

#[derive(Serialize, Deserialize)]
struct RawPoleTerm {
    p: f64,
    poles: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n: u32,
    terms: Vec<RawPoleTerm>,
}

impl TryFrom<RawModel> for FitSDModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        let terms = raw
            .terms
            .into_iter()
            .map(|t| {
                PoleTerm::new(
                    t.p,
                    t.poles.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        FitSDModel::new(raw.n, terms)
    }
}

impl From<FitSDModel> for RawModel {
    fn from(m: FitSDModel) -> Self {
        RawModel {
            n: m.low_freq_exponent,
            terms: m
                .terms
                .into_iter()
                .map(|t| RawPoleTerm {
                    p: t.weight,
                    poles: t.poles.iter().map(|w| [w.re, w.im]).collect(),
                })
                .collect(),
        }
    }
}

impl FitSDModel {
    /// Validated model; `low_freq_exponent` is the odd exponent `n`.
    pub fn new(low_freq_exponent: u32, terms: Vec<PoleTerm>) -> Result<Self> {
        let n = low_freq_exponent;
        if n == 0 {
            return Err(Error::InvalidInput("low-frequency exponent must be >= 1".into()));
        }
        if n.is_multiple_of(2) {
            return Err(Error::NotSupported(format!(
                "low-frequency exponent n = {n} is even: even exponents admit no finite \
                 exponential representation of the bath correlation function \
                 (the time dependence involves exponential-integral functions), \
                 so they are rejected; use an odd exponent"
            )));
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("model must contain at least one term".into()));
        }
        for (k, term) in terms.iter().enumerate() {
            let kappa = term.poles.len() as i64;
            if n as i64 - 2 * kappa - 2 >= 0 {
                return Err(Error::InvalidInput(format!(
                    "term {k} has {kappa} poles which cannot bound the spectral density \
                     at high frequency for n = {n}: need n - 2κ - 2 < 0"
                )));
            }
        }
        Ok(Self { low_freq_exponent, terms })
    }

    pub fn low_freq_exponent(&self) -> u32 {
        self.low_freq_exponent
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    /// Total number of poles in the upper-right quadrant.
    pub fn total_pole_count(&self) -> usize {
        self.terms.iter().map(|t| t.poles.len()).sum()
    }

    /// `J(ω)` on the real axis.
    pub fn evaluate(&self, omega: f64) -> f64 {
        self.evaluate_with_spurious_imag(omega).0
    }

    /// Real-axis value together with the spurious imaginary residue of
    /// the complex pole-product assembly (a numerical health check;
    /// algebraically zero).
    pub fn evaluate_with_spurious_imag(&self, omega: f64) -> (f64, f64) {
        let v = self.evaluate_complex(Complex64::new(omega, 0.0));
        (v.re, v.im)
    }

    /// Analytic continuation of `J` off the real axis.
    pub fn evaluate_complex(&self, z: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            sum += term.weight * (term.pole_product(z) - term.pole_product(-z));
        }
        z.powu(self.low_freq_exponent - 1) * sum
    }

    /// `(low, high)` power-law exponents: `ωⁿ` at the origin and
    /// `ω^{n-2κ_min-2}` at infinity.
    pub fn tail_exponents(&self) -> (i32, i32) {
        let n = self.low_freq_exponent as i32;
        let kappa_min = self.terms.iter().map(|t| t.poles.len()).min().unwrap() as i32;
        (n, n - 2 * kappa_min - 2)
    }

    /// Model with every prefactor multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm::new(t.weight * c, t.poles.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.low_freq_exponent, terms)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn canonical_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("model serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Analytic target spectral densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSD {
    /// `2πλωγ/(ω²+γ²)`.
    DrudeLorentz { lambda: f64, gamma: f64 },
    /// `ηω e^{-ω/Λ}` with cutoff `Λ`.
    OhmicExp { eta: f64, cutoff: f64 },
    /// `πSω/(√(2π)σ) · exp(-ln²(ω/ω_c)/(2σ²))`.
    LogNormal {
        #[serde(rename = "S")]
        s: f64,
        sigma: f64,
        omega_c: f64,
    },
    /// Vibrational mode of frequency `Ω` and Huang–Rhys factor `X`
    /// damped by an ohmic bath with exponential cutoff.
    DampedVibration { eta: f64, cutoff: f64, omega: f64, huang_rhys: f64 },
    Sum { parts: Vec<ReferenceSD> },
}

impl ReferenceSD {
    /// Parameter validation; all parameters must be strictly positive
    /// and sums nonempty.
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            ReferenceSD::DrudeLorentz { lambda, gamma } => {
                pos("lambda", *lambda)?;
                pos("gamma", *gamma)
            }
            ReferenceSD::OhmicExp { eta, cutoff } => {
                pos("eta", *eta)?;
                pos("cutoff", *cutoff)
            }
            ReferenceSD::LogNormal { s, sigma, omega_c } => {
                pos("S", *s)?;
                pos("sigma", *sigma)?;
                pos("omega_c", *omega_c)
            }
            ReferenceSD::DampedVibration { eta, cutoff, omega, huang_rhys } => {
                pos("eta", *eta)?;
                pos("cutoff", *cutoff)?;
                pos("omega", *omega)?;
                pos("huang_rhys", *huang_rhys)
            }
            ReferenceSD::Sum { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidInput("sum must contain at least one part".into()));
                }
                parts.iter().try_for_each(ReferenceSD::validate)
            }
        }
    }

    /// Closed-form value; `ω ≤ 0` is a domain error for the log-normal.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        match self {
            ReferenceSD::LogNormal { .. } if omega <= 0.0 => Err(Error::InvalidInput(format!(
                "log-normal spectral density needs ω > 0, got {omega}"
            ))),
            ReferenceSD::Sum { parts } => {
                parts.iter().map(|p| p.evaluate(omega)).sum::<Result<f64>>()
            }
            _ => Ok(self.value_unchecked(omega)),
        }
    }

    fn value_unchecked(&self, w: f64) -> f64 {
        match self {
            ReferenceSD::DrudeLorentz { lambda, gamma } => {
                2.0 * PI * lambda * w * gamma / (w * w + gamma * gamma)
            }
            ReferenceSD::OhmicExp { eta, cutoff } => eta * w * (-w / cutoff).exp(),
            ReferenceSD::LogNormal { s, sigma, omega_c } => {
                if w <= 0.0 {
                    return 0.0;
                }
                let u = (w / omega_c).ln();
                PI * s * w / (SQRT_TAU * sigma) * (-u * u / (2.0 * sigma * sigma)).exp()
            }
            ReferenceSD::DampedVibration { eta, cutoff, omega, huang_rhys } => {
                let j_ohm = eta * w * (-w / cutoff).exp();
                // J_ohm(ω)·Ei(ω/Λ) assembled from e^{-x}Ei(x) so large ω
                // cannot overflow.
                let level_shift = if w > 0.0 {
                    omega - eta * cutoff / PI + eta * w * expint_ei_scaled(w / cutoff) / PI
                } else {
                    omega - eta * cutoff / PI
                };
                let d = w - level_shift;
                huang_rhys * w * w * j_ohm / (d * d + j_ohm * j_ohm)
            }
            ReferenceSD::Sum { parts } => parts.iter().map(|p| p.value_unchecked(w)).sum(),
        }
    }

    /// Spectral density with linear strength parameter scaled by `c`.
    pub fn scaled(&self, c: f64) -> ReferenceSD {
        match self.clone() {
            ReferenceSD::DrudeLorentz { lambda, gamma } => {
                ReferenceSD::DrudeLorentz { lambda: lambda * c, gamma }
            }
            ReferenceSD::OhmicExp { eta, cutoff } => ReferenceSD::OhmicExp { eta: eta * c, cutoff },
            ReferenceSD::LogNormal { s, sigma, omega_c } => {
                ReferenceSD::LogNormal { s: s * c, sigma, omega_c }
            }
            ReferenceSD::DampedVibration { eta, cutoff, omega, huang_rhys } => {
                ReferenceSD::DampedVibration { eta, cutoff, omega, huang_rhys: huang_rhys * c }
            }
            ReferenceSD::Sum { parts } => {
                ReferenceSD::Sum { parts: parts.iter().map(|p| p.scaled(c)).collect() }
            }
        }
    }
}

/// Common evaluation surface for fit models and reference forms.
///
/// `value` is queried at `ω > 0` only.
pub trait SpectralDensity {
    fn value(&self, omega: f64) -> f64;

    /// Rough upper characteristic frequency, used to seed integration
    /// grids and cutoff searches.
    fn frequency_scale(&self) -> f64;

    /// Algebraic high-frequency exponent, `None` when the falloff is
    /// faster than any power.
    fn high_frequency_exponent(&self) -> Option<i32>;

    /// Whether `J(ω)/ω²` is integrable at the origin.
    fn huang_rhys_integrable(&self) -> bool;
}

impl SpectralDensity for FitSDModel {
    fn value(&self, omega: f64) -> f64 {
        self.evaluate(omega)
    }

    fn frequency_scale(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.poles.iter())
            .map(|w| w.norm())
            .fold(1.0, f64::max)
    }

    fn high_frequency_exponent(&self) -> Option<i32> {
        Some(self.tail_exponents().1)
    }

    fn huang_rhys_integrable(&self) -> bool {
        self.low_freq_exponent >= 3
    }
}

impl SpectralDensity for ReferenceSD {
    fn value(&self, omega: f64) -> f64 {
        self.value_unchecked(omega)
    }

    fn frequency_scale(&self) -> f64 {
        match self {
            ReferenceSD::DrudeLorentz { gamma, .. } => *gamma,
            ReferenceSD::OhmicExp { cutoff, .. } => *cutoff,
            ReferenceSD::LogNormal { sigma, omega_c, .. } => omega_c * (2.0 * sigma).exp(),
            ReferenceSD::DampedVibration { cutoff, omega, .. } => cutoff.max(*omega),
            ReferenceSD::Sum { parts } => {
                parts.iter().map(|p| p.frequency_scale()).fold(1.0, f64::max)
            }
        }
    }

    fn high_frequency_exponent(&self) -> Option<i32> {
        match self {
            ReferenceSD::DrudeLorentz { .. } => Some(-1),
            ReferenceSD::OhmicExp { .. }
            | ReferenceSD::LogNormal { .. }
            | ReferenceSD::DampedVibration { .. } => None,
            ReferenceSD::Sum { parts } => {
                parts.iter().filter_map(|p| p.high_frequency_exponent()).max()
            }
        }
    }

    fn huang_rhys_integrable(&self) -> bool {
        match self {
            ReferenceSD::DrudeLorentz { .. } | ReferenceSD::OhmicExp { .. } => false,
            ReferenceSD::LogNormal { .. } | ReferenceSD::DampedVibration { .. } => true,
            ReferenceSD::Sum { parts } => parts.iter().all(|p| p.huang_rhys_integrable()),
        }
    }
}

impl<S: SpectralDensity + ?Sized> SpectralDensity for &S {
    fn value(&self, omega: f64) -> f64 {
        (**self).value(omega)
    }
    fn frequency_scale(&self) -> f64 {
        (**self).frequency_scale()
    }
    fn high_frequency_exponent(&self) -> Option<i32> {
        (**self).high_frequency_exponent()
    }
    fn huang_rhys_integrable(&self) -> bool {
        (**self).huang_rhys_integrable()
    }
}

/// Reorganization energy `E_λ = (1/π)∫₀^∞ J(ω)/ω dω`.
pub fn reorganization_energy<S: SpectralDensity + ?Sized>(sd: &S) -> Result<f64> {
    sd_moment(sd, 1)
}

/// Total Huang–Rhys factor `X = (1/π)∫₀^∞ J(ω)/ω² dω`.
///
/// Rejected for spectral densities whose `J/ω²` diverges at the origin
/// (ohmic forms, fit models with `n = 1`).
pub fn huang_rhys<S: SpectralDensity + ?Sized>(sd: &S) -> Result<f64> {
    if !sd.huang_rhys_integrable() {
        return Err(Error::DivergentIntegral(
            "J(ω)/ω² is not integrable at ω = 0 for this spectral density \
             (ohmic low-frequency behavior); the Huang-Rhys factor diverges"
                .into(),
        ));
    }
    sd_moment(sd, 2)
}

/// `(1/π)∫₀^∞ J(ω)/ω^p dω` with an algebraic tail correction beyond an
/// automatically chosen cutoff.  Relative target 1e-9 so downstream
/// 1e-8 guarantees hold.
fn sd_moment<S: SpectralDensity + ?Sized>(sd: &S, inverse_power: i32) -> Result<f64> {
    let scale = sd.frequency_scale();
    let probe = logspace(scale * 1e-6, scale * 1e3, 600);
    let j_max = probe.iter().map(|&w| sd.value(w).abs()).fold(0.0, f64::max);
    if j_max == 0.0 {
        return Ok(0.0);
    }

    // Cutoff where J has fallen by 1e-12 of its maximum (capped for
    // slowly decaying algebraic tails; the analytic estimate covers the
    // remainder).
    let mut cut = 10.0 * scale;
    while sd.value(cut).abs() > 1e-12 * j_max && cut < scale * 1e14 {
        cut *= 2.0;
    }

    let f = |w: f64| sd.value(w) / w.powi(inverse_power) / PI;
    let mut breakpoints = vec![0.0];
    breakpoints.extend(logspace(scale * 1e-9, cut, 64));
    let q = integrate_adaptive(f, &breakpoints, 0.0, 1e-9, 50_000)?;

    // Tail estimate from the measured local power law at the cutoff.
    let j_cut = sd.value(cut);
    let mut tail = 0.0;
    if j_cut.abs() > 1e-280 {
        let j2 = sd.value(2.0 * cut);
        if j2.abs() > 0.0 {
            let slope = (j2 / j_cut).abs().ln() / std::f64::consts::LN_2;
            let p = inverse_power as f64;
            if slope < p - 1.0 - 0.05 {
                tail = j_cut / cut.powi(inverse_power - 1) / (p - 1.0 - slope) / PI;
            }
        }
    }
    Ok(q.value + tail)
}
