//! Linear absorption spectra from lineshape functions.
//!
//! `A(ω) = (1/π) Re ∫₀^∞ dt e^{iωt} e^{-g(t)}`, evaluated by a
//! half-sided FFT of the centered lineshape so the zero-phonon line
//! sits at ω = 0.  Spectra are normalized so that the trapezoid area of
//! the sampled values plus `2π` times the delta weight equals `2π`.
//!
//! At zero temperature (and for superohmic densities at any
//! temperature) `e^{-g}` tends to a nonzero constant: a true delta at
//! the zero-phonon line.  Either an artificial broadening `γ_add`
//! renders it as a Lorentzian of that half width, or, with no
//! broadening, the constant tail is split off analytically and reported
//! as `delta_weight`.

use crate::error::{Error, Result};
use crate::grid::trapezoid;
use crate::lineshape::LineshapeSeries;
use crate::specdens::{huang_rhys, SpectralDensity};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Window applied before the transform when the signal has not decayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    None,
    /// Half Hann taper: 1 at t = 0, 0 at the last sample.
    Hann,
}

/// Transform configuration.
///
/// `n_points` is the FFT length; the lineshape is sampled on the first
/// quarter and zero-padded, which refines the frequency sampling
/// without changing resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FftConfig {
    pub n_points: usize,
    pub dt: f64,
    pub gamma_add: f64,
    pub window: Window,
}

impl FftConfig {
    /// Defaults: 2²⁰ points with `dt` set so the Nyquist frequency is
    /// at least `8·max(ω_feature, 2000 cm⁻¹)`, no window, no
    /// broadening.
    pub fn for_max_feature(omega_feature: f64) -> Self {
        let nyquist = 8.0 * omega_feature.max(2000.0);
        FftConfig {
            n_points: 1 << 20,
            dt: PI / nyquist,
            gamma_add: 0.0,
            window: Window::None,
        }
    }

    /// Number of lineshape samples (a quarter of the FFT length).
    pub fn sample_count(&self) -> usize {
        (self.n_points / 4).max(2)
    }

    /// The time grid on which the lineshape must be sampled.
    pub fn time_grid(&self) -> Vec<f64> {
        (0..self.sample_count()).map(|k| k as f64 * self.dt).collect()
    }
}

/// A sampled absorption spectrum with the zero-phonon line at ω = 0.
#[derive(Debug, Clone)]
pub struct Spectrum {
    omega_grid: Vec<f64>,
    values: Vec<f64>,
    delta_weight: Option<f64>,
    normalization: f64,
}

impl Spectrum {
    /// Normalize raw values (natural total mass ≈ 1 conventions) so
    /// that `trapezoid + 2π·delta_weight = 2π` holds exactly.
    fn new_normalized(omega_grid: Vec<f64>, raw: Vec<f64>, delta_fraction: Option<f64>) -> Self {
        let raw_total = trapezoid(&omega_grid, &raw) + delta_fraction.unwrap_or(0.0);
        let scale = 1.0 / raw_total;
        let values: Vec<f64> = raw.iter().map(|v| v * scale * 2.0 * PI).collect();
        let spectrum = Spectrum {
            omega_grid,
            values,
            delta_weight: delta_fraction.map(|d| d * scale),
            normalization: scale,
        };
        if spectrum.has_negative_excursions() {
            log::warn!(
                "spectrum has negative excursions below -1e-3 of its maximum; \
                 the coth expansion order or the time window is too small"
            );
        }
        spectrum
    }

    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fractional zero-phonon-line mass, when split off analytically.
    pub fn delta_weight(&self) -> Option<f64> {
        self.delta_weight
    }

    /// Scale factor that was applied to the raw transform.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `∫A dω + 2π·delta_weight`; equals 2π after normalization.
    pub fn area(&self) -> f64 {
        trapezoid(&self.omega_grid, &self.values)
            + 2.0 * PI * self.delta_weight.unwrap_or(0.0)
    }

    /// Under-resolution indicator: values below `-1e-3·max`.
    pub fn has_negative_excursions(&self) -> bool {
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        self.values.iter().any(|&v| v < -1e-3 * max)
    }

    pub fn peak_frequency(&self) -> f64 {
        let mut best = 0usize;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        self.omega_grid[best]
    }

    /// Linear interpolation onto an arbitrary frequency; 0 outside.
    pub fn interpolate(&self, omega: f64) -> f64 {
        let g = &self.omega_grid;
        if omega < g[0] || omega > g[g.len() - 1] {
            return 0.0;
        }
        let idx = g.partition_point(|&x| x < omega).max(1).min(g.len() - 1);
        let (x0, x1) = (g[idx - 1], g[idx]);
        let frac = if x1 > x0 { (omega - x0) / (x1 - x0) } else { 0.0 };
        self.values[idx - 1] * (1.0 - frac) + self.values[idx] * frac
    }
}

/// Half-sided Fourier transform of `e^{-g(t)}` over the configured
/// window.
///
/// The lineshape grid must match `fft.dt` and `fft.sample_count()`.
/// If `e^{-g}` has not decayed by the window end (to 1e-6, including
/// `γ_add` and the window), the transform would ring; in that case a
/// flat tail is split off as the delta weight when it is genuinely
/// constant, and otherwise the spectrum is rejected as unresolved.
pub fn absorption(g: &LineshapeSeries, fft: &FftConfig) -> Result<Spectrum> {
    let t = g.t_grid();
    let n_samples = fft.sample_count();
    if t.len() != n_samples {
        return Err(Error::InvalidInput(format!(
            "lineshape has {} samples but the transform needs {n_samples}",
            t.len()
        )));
    }
    if t[0] != 0.0 || !crate::grid::is_uniform(t, 1e-9) || (t[1] - t[0] - fft.dt).abs() > 1e-9 * fft.dt
    {
        return Err(Error::InvalidInput(
            "lineshape must be sampled on the uniform transform grid starting at t = 0".into(),
        ));
    }
    if fft.n_points < n_samples {
        return Err(Error::InvalidInput("n_points must cover the sample count".into()));
    }

    // Signal with broadening and window.
    let window_at = |k: usize| -> f64 {
        match fft.window {
            Window::None => 1.0,
            Window::Hann => {
                let x = k as f64 / (n_samples - 1) as f64;
                (0.5 * PI * x).cos().powi(2)
            }
        }
    };
    let mut signal: Vec<Complex64> = (0..n_samples)
        .map(|k| ((-g.values()[k]).exp()) * (-fft.gamma_add * t[k]).exp() * window_at(k))
        .collect();

    let tail = signal[n_samples - 1].norm();
    let mut delta_fraction = None;
    if tail > 1e-6 {
        let probe = signal[(n_samples as f64 * 0.95) as usize];
        let flat = (signal[n_samples - 1] - probe).norm() <= 1e-3 * tail;
        let undamped = fft.gamma_add == 0.0 && fft.window == Window::None;
        if undamped && flat {
            // Constant tail = delta at the zero-phonon line.  Subtract
            // it so the transform sees a decaying signal and report its
            // weight separately.
            let plateau = signal[n_samples - 1];
            if plateau.im.abs() > 1e-3 * plateau.re.abs() {
                return Err(Error::UnresolvedSpectrum(format!(
                    "lineshape tail has a residual imaginary drift ({plateau}); \
                     the time window is too short for the delta split"
                )));
            }
            for s in signal.iter_mut() {
                *s -= plateau;
            }
            delta_fraction = Some(plateau.re);
        } else {
            return Err(Error::UnresolvedSpectrum(format!(
                "e^-g(t) is {tail:.3e} at the window end (needs <= 1e-6): \
                 extend the window, add artificial broadening, or set a window function"
            )));
        }
    }

    // Half-sided transform via inverse FFT: X_j = Σ_k F_k e^{+2πijk/N}.
    let half_first = 0.5 * signal[0].re;
    signal.resize(fft.n_points, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(fft.n_points).process(&mut signal);

    let n = fft.n_points;
    let d_omega = 2.0 * PI / (n as f64 * fft.dt);
    // Assemble on an ascending grid: j > N/2 are negative frequencies.
    let mut omega_grid = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for (j, s) in signal.iter().enumerate().skip(n / 2 + 1) {
        omega_grid.push((j as f64 - n as f64) * d_omega);
        raw.push((fft.dt * (s.re - half_first)) / PI);
    }
    for (j, s) in signal.iter().enumerate().take(n / 2 + 1) {
        omega_grid.push(j as f64 * d_omega);
        raw.push((fft.dt * (s.re - half_first)) / PI);
    }

    Ok(Spectrum::new_normalized(omega_grid, raw, delta_fraction))
}

/// Weak-coupling zero-temperature spectrum: a delta of weight `1-X` at
/// the zero-phonon line and a sideband `J(ω)/(πω²)`.
///
/// Valid for total Huang-Rhys factor `X < 1`.
pub fn t0_weak_coupling_spectrum<S: SpectralDensity + ?Sized>(
    sd: &S,
    omega_grid: &[f64],
) -> Result<Spectrum> {
    let x = huang_rhys(sd)?;
    if x >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "total Huang-Rhys factor X = {x:.3} >= 1: the single-phonon truncation \
             behind the weak-coupling spectrum does not apply"
        )));
    }
    let raw: Vec<f64> = omega_grid
        .iter()
        .map(|&w| if w > 0.0 { sd.value(w) / (PI * w * w) } else { 0.0 })
        .collect();
    Ok(Spectrum::new_normalized(omega_grid.to_vec(), raw, Some(1.0 - x)))
}

/// Distances between two spectra on the first spectrum's grid.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SpectrumDistance {
    /// `∫|a-b| dω / 2π` over the common grid.
    pub l1: f64,
    /// `max|a-b| / max a`.
    pub linf: f64,
    /// Peak displacement `argmax b - argmax a` in cm⁻¹.
    pub peak_shift: f64,
}

/// Compare two normalized spectra; `b` is linearly resampled onto the
/// grid of `a` restricted to the overlap.
pub fn compare_spectra(a: &Spectrum, b: &Spectrum) -> SpectrumDistance {
    let lo = a.omega_grid()[0].max(b.omega_grid()[0]);
    let hi = a.omega_grid().last().unwrap().min(*b.omega_grid().last().unwrap());
    let mut xs = Vec::new();
    let mut diff = Vec::new();
    let mut linf: f64 = 0.0;
    let mut a_max: f64 = 0.0;
    for (x, va) in a.omega_grid().iter().zip(a.values()) {
        if *x < lo || *x > hi {
            continue;
        }
        let vb = b.interpolate(*x);
        xs.push(*x);
        diff.push((va - vb).abs());
        linf = linf.max((va - vb).abs());
        a_max = a_max.max(va.abs());
    }
    let l1 = trapezoid(&xs, &diff) / (2.0 * PI);
    SpectrumDistance {
        l1,
        linf: if a_max > 0.0 { linf / a_max } else { 0.0 },
        peak_shift: b.peak_frequency() - a.peak_frequency(),
    }
}
