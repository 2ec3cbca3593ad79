//! Finite pole expansions of the hyperbolic cotangent.
//!
//! All finite-temperature schemes approximate
//!
//! ```text
//! coth(x) ≈ 1/x + Σ_{ℓ=1}^L η_ℓ (1/(x-ξ_ℓ) + 1/(x-ξ_ℓ*)),   Im ξ_ℓ > 0.
//! ```
//!
//! Matsubara truncates the exact partial-fraction expansion (poles at
//! `iπℓ`, unit residues) and converges slowly.  The Padé construction
//! places all poles on the imaginary axis with positive residues and
//! converges far faster; its parameters come from the positive
//! eigenvalues of two zero-diagonal symmetric tridiagonal matrices.
//! The zero-temperature variant replaces coth by 1 for positive
//! arguments (no poles, no `1/x` head).

use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::special::coth_real;
use crate::tridiag::positive_eigenvalues_zero_diagonal;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Expansion scheme selector.
///
/// `CroySaalmann` is recognized for completeness but not constructed:
/// its pole locations come from polynomial root finding that needs
/// extended precision to place poles reliably in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CothScheme {
    Matsubara,
    Pade,
    ZeroTemperature,
    CroySaalmann,
}

impl std::fmt::Display for CothScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CothScheme::Matsubara => "matsubara",
            CothScheme::Pade => "pade",
            CothScheme::ZeroTemperature => "zero_temperature",
            CothScheme::CroySaalmann => "croy_saalmann",
        };
        f.write_str(s)
    }
}

/// One pole pair of an expansion: `ξ` with `Im ξ > 0` and real residue `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CothTerm {
    pub pole: Complex64,
    pub residue: f64,
}

/// A finite pole expansion of coth.
#[derive(Debug, Clone, PartialEq)]
pub struct CothExpansion {
    scheme: CothScheme,
    terms: Vec<CothTerm>,
    has_head: bool,
}

impl CothExpansion {
    /// Truncated Matsubara expansion: poles `iπℓ`, residues 1, `l ≥ 1`.
    pub fn matsubara(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidInput("matsubara expansion needs L >= 1".into()));
        }
        let terms = (1..=l)
            .map(|k| CothTerm {
                pole: Complex64::new(0.0, std::f64::consts::PI * k as f64),
                residue: 1.0,
            })
            .collect();
        Ok(Self { scheme: CothScheme::Matsubara, terms, has_head: true })
    }

    /// Padé expansion of order `l ≥ 1`.
    ///
    /// Poles are `i/λ` over the positive eigenvalues `λ` of the `2L×2L`
    /// zero-diagonal tridiagonal matrix with off-diagonals
    /// `1/√((2j+1)(2j+3))`; the residues combine those with the positive
    /// eigenvalues of the `(2L-1)×(2L-1)` companion matrix with
    /// off-diagonals `1/√((2j+3)(2j+5))`.  Residue products are
    /// accumulated in log space because eigenvalue gaps span many orders
    /// of magnitude at large `L`.
    pub fn pade(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidInput("pade expansion needs L >= 1".into()));
        }
        let dim = 2 * l;
        let off: Vec<f64> = (1..dim)
            .map(|j| 1.0 / (((2 * j + 1) * (2 * j + 3)) as f64).sqrt())
            .collect();
        let ev = positive_eigenvalues_zero_diagonal(&off)?;
        if ev.len() != l {
            return Err(Error::EigenNoConvergence(30 * dim));
        }
        // Ascending pole magnitudes y_j = 1/λ_j.
        let mut y: Vec<f64> = ev.iter().map(|&v| 1.0 / v).collect();
        y.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let zeta: Vec<f64> = if l > 1 {
            let dim2 = 2 * l - 1;
            let off2: Vec<f64> = (1..dim2)
                .map(|j| 1.0 / (((2 * j + 3) * (2 * j + 5)) as f64).sqrt())
                .collect();
            positive_eigenvalues_zero_diagonal(&off2)?
                .iter()
                .map(|&v| 1.0 / v)
                .collect()
        } else {
            Vec::new()
        };
        if zeta.len() + 1 != l {
            return Err(Error::EigenNoConvergence(30 * (2 * l - 1)));
        }

        let prefactor = 0.5 * l as f64 * (2 * l + 3) as f64;
        let mut terms = Vec::with_capacity(l);
        for (j, &yj) in y.iter().enumerate() {
            // η_j = prefactor · Π_i (ζ_i² - y_j²) / Π_{i≠j} (y_i² - y_j²)
            let mut log_mag = 0.0f64;
            let mut sign = 1.0f64;
            for &z in &zeta {
                let f = z * z - yj * yj;
                sign *= f.signum();
                log_mag += f.abs().ln();
            }
            for (i, &yi) in y.iter().enumerate() {
                if i != j {
                    let f = yi * yi - yj * yj;
                    sign *= f.signum();
                    log_mag -= f.abs().ln();
                }
            }
            let residue = prefactor * sign * log_mag.exp();
            terms.push(CothTerm { pole: Complex64::new(0.0, yj), residue });
        }
        Ok(Self { scheme: CothScheme::Pade, terms, has_head: true })
    }

    /// The `coth ≈ 1` scheme: no poles, no head, exact only in the
    /// high-frequency limit.
    pub fn zero_temperature() -> Self {
        Self { scheme: CothScheme::ZeroTemperature, terms: Vec::new(), has_head: false }
    }

    /// Construct by scheme tag, as selected on a command line.
    pub fn build(scheme: CothScheme, l: usize) -> Result<Self> {
        match scheme {
            CothScheme::Matsubara => Self::matsubara(l),
            CothScheme::Pade => Self::pade(l),
            CothScheme::ZeroTemperature => Ok(Self::zero_temperature()),
            CothScheme::CroySaalmann => Err(Error::NotSupported(
                "the Croy-Saalmann partial-fraction decomposition is not constructed here: \
                 its poles require polynomial root finding in extended precision; \
                 use the pade scheme instead"
                    .into(),
            )),
        }
    }

    pub fn scheme(&self) -> CothScheme {
        self.scheme
    }

    pub fn terms(&self) -> &[CothTerm] {
        &self.terms
    }

    /// Number of expansion terms `L`.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn has_head(&self) -> bool {
        self.has_head
    }

    /// Evaluate the expansion at a complex point.
    ///
    /// Arguments within 1e-12 of a pole (including the `1/x` head) are
    /// rejected.  The zero-temperature scheme returns ±1 by the sign of
    /// the real part.
    pub fn evaluate(&self, x: Complex64) -> Result<Complex64> {
        if self.scheme == CothScheme::ZeroTemperature {
            return Ok(Complex64::new(if x.re >= 0.0 { 1.0 } else { -1.0 }, 0.0));
        }
        if x.norm() <= 1e-12 {
            return Err(Error::PoleCollision(format!("argument {x} sits on the 1/x head pole")));
        }
        let mut sum = x.inv();
        for t in &self.terms {
            if (x - t.pole).norm() <= 1e-12 || (x - t.pole.conj()).norm() <= 1e-12 {
                return Err(Error::PoleCollision(format!(
                    "argument {x} is within 1e-12 of expansion pole {}",
                    t.pole
                )));
            }
            sum += t.residue * ((x - t.pole).inv() + (x - t.pole.conj()).inv());
        }
        Ok(sum)
    }

    /// Real-axis evaluation without complex arithmetic: for purely
    /// imaginary poles `iy` the pole pair contributes `2ηx/(x²+y²)`.
    pub fn evaluate_real(&self, x: f64) -> Result<f64> {
        if self.scheme == CothScheme::ZeroTemperature {
            return Ok(if x >= 0.0 { 1.0 } else { -1.0 });
        }
        Ok(self.evaluate(Complex64::new(x, 0.0))?.re)
    }

    /// Supremum of the relative error against exact coth over a 10⁴
    /// point log grid on `[x_lo, x_hi]`.
    pub fn max_relative_error(&self, x_lo: f64, x_hi: f64) -> f64 {
        assert!(0.0 < x_lo && x_lo < x_hi, "need 0 < x_lo < x_hi");
        logspace(x_lo, x_hi, 10_000)
            .into_iter()
            .map(|x| {
                let exact = coth_real(x);
                let approx = self.evaluate_real(x).expect("real positive axis is pole free");
                ((approx - exact) / exact).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Coefficient of `x^{2m-1}` in the Maclaurin expansion of
    /// `C(x) - 1/x`, computed analytically from the pole pairs:
    /// each pair `(iy, η)` contributes `2ηx/(x²+y²)`.
    pub fn maclaurin_odd_coefficient(&self, m: usize) -> f64 {
        assert!(m >= 1);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        sign * self
            .terms
            .iter()
            .map(|t| 2.0 * t.residue / t.pole.norm().powi(2 * m as i32))
            .sum::<f64>()
    }
}

/// Leading Maclaurin coefficients of `coth(x) - 1/x`:
/// `x/3 - x³/45 + 2x⁵/945 - x⁷/4725 + 2x⁹/93555 - ...`.
pub const COTH_MACLAURIN: [f64; 6] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
];
