//! Analytic exponential representations of bath correlation functions.
//!
//! The library fits spectral densities with a family of simple-pole
//! functions, expands the hyperbolic cotangent into a finite pole sum
//! (Matsubara or Padé), and combines the two by residue calculus to
//! express the finite-temperature bath correlation function as a finite
//! sum of damped complex exponentials.  Lineshape functions and linear
//! absorption spectra computed from these exponentials are used to
//! validate fits against brute-force quadrature.
//!
//! Conventions: frequencies and energies are in cm⁻¹, temperatures in
//! Kelvin at API boundaries (converted internally with [`units::KB_WAVENUMBER_PER_KELVIN`]),
//! and the time variable is conjugate to cm⁻¹ so that phases are `ω·t`
//! with no extra constants.  See [`units`] for the femtosecond conversion.

pub mod bcf;
pub mod cothexp;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod lineshape;
pub mod quadrature;
pub mod specdens;
pub mod special;
pub mod spectra;
pub mod threads;
pub mod tridiag;
pub mod units;

pub use error::{Error, ErrorCategory, Result};
pub use num_complex::Complex64;
