//! Nonlinear least-squares fitting of spectral densities with the
//! pole-product family.
//!
//! The objective over the sample grid is
//!
//! ```text
//! Σ_i [ w_J (J_fit(ω_i) - J_t(ω_i))² + w_{J/ω²} (J_fit(ω_i)/ω_i² - J_t(ω_i)/ω_i²)² ]
//! ```
//!
//! minimized over `{p_k, Ω_j, γ_j}` in log parametrization (positivity
//! for free), with analytic Jacobians and seeded multistarts whose
//! first guess places poles on detected peaks of the target.

mod lm;

pub use lm::{minimize, minimize_bounded, LmOptions, LmOutcome};

use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::specdens::{FitSDModel, PoleTerm, ReferenceSD, SpectralDensity};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What to fit against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitTarget {
    Reference(ReferenceSD),
    /// Tabulated `(ω, J)` pairs; fitted at exactly these samples.
    Table(TableTarget),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableTarget {
    Table { data: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Frequency sample grid for reference targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
    pub spacing: GridSpacing,
}

impl GridSpec {
    fn build(&self) -> Result<Vec<f64>> {
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min) || self.count < 3 {
            return Err(Error::InvalidInput(
                "grid needs 0 < omega_min < omega_max and at least 3 points".into(),
            ));
        }
        Ok(match self.spacing {
            GridSpacing::Linear => crate::grid::linspace(self.omega_min, self.omega_max, self.count),
            GridSpacing::Log => logspace(self.omega_min, self.omega_max, self.count),
        })
    }
}

fn default_multistarts() -> usize {
    16
}
fn default_max_iter() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-10
}

/// Fit configuration.
///
/// Omitted weights follow the rule: equal weights on `J` and `J/ω²`
/// for `n ≥ 3`, `J` only for `n = 1` (where `J/ω²` diverges at zero
/// frequency).  An omitted grid spans `[ω_peak/100, 20·ω_peak]` with
/// 400 log-spaced points around the target's maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub n: u32,
    pub poles_per_term: Vec<usize>,
    #[serde(default)]
    pub weight_j: Option<f64>,
    #[serde(default)]
    pub weight_jw2: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_multistarts")]
    pub multistarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n.is_multiple_of(2) {
            return Err(Error::NotSupported(format!(
                "fit exponent n = {} must be a positive odd integer: even exponents \
                 admit no finite exponential representation of the bath correlation function",
                self.n
            )));
        }
        if self.poles_per_term.is_empty() || self.poles_per_term.contains(&0) {
            return Err(Error::InvalidInput("poles_per_term must list positive counts".into()));
        }
        for &kappa in &self.poles_per_term {
            if self.n as i64 - 2 * kappa as i64 - 2 >= 0 {
                return Err(Error::InvalidInput(format!(
                    "a term with {kappa} poles cannot bound the spectral density for n = {}",
                    self.n
                )));
            }
        }
        let (wj, wj2) = self.effective_weights();
        if wj < 0.0 || wj2 < 0.0 || (wj == 0.0 && wj2 == 0.0) {
            return Err(Error::InvalidInput("at least one residual weight must be positive".into()));
        }
        if wj2 > 0.0 && self.n < 3 {
            return Err(Error::InvalidInput(
                "weighting J/ω² needs n >= 3; for n = 1 the fitted J/ω² diverges at zero \
                 frequency"
                    .into(),
            ));
        }
        if self.multistarts == 0 || self.max_iter == 0 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput(
                "multistarts, max_iter must be positive and tol > 0".into(),
            ));
        }
        Ok(())
    }

    /// `(w_J, w_{J/ω²})` after applying the defaults rule.
    pub fn effective_weights(&self) -> (f64, f64) {
        let default_jw2 = if self.n >= 3 { 1.0 } else { 0.0 };
        (self.weight_j.unwrap_or(1.0), self.weight_jw2.unwrap_or(default_jw2))
    }
}

/// Fit outcome: the best model over all multistarts.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitSDModel,
    /// `√Σ(J_fit-J_t)²` over the grid (unweighted).
    pub residual_j: f64,
    /// `√Σ(J_fit/ω²-J_t/ω²)²` over the grid (unweighted).
    pub residual_jw2: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Parameter layout: `[ln p_1..ln p_K, (ln Ω, ln γ) per pole, term-major]`.
struct Layout {
    n: u32,
    term_sizes: Vec<usize>,
}

impl Layout {
    fn param_count(&self) -> usize {
        self.term_sizes.len() + 2 * self.term_sizes.iter().sum::<usize>()
    }

    fn pack(&self, model: &FitSDModel) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.param_count());
        for t in model.terms() {
            theta.push(t.weight().ln());
        }
        for t in model.terms() {
            for p in t.poles() {
                theta.push(p.re.ln());
                theta.push(p.im.ln());
            }
        }
        theta
    }

    fn unpack(&self, theta: &[f64]) -> (Vec<f64>, Vec<Vec<(f64, f64)>>) {
        let k = self.term_sizes.len();
        let weights: Vec<f64> = theta[..k].iter().map(|v| v.exp()).collect();
        let mut poles = Vec::with_capacity(k);
        let mut idx = k;
        for &size in &self.term_sizes {
            let mut term = Vec::with_capacity(size);
            for _ in 0..size {
                term.push((theta[idx].exp(), theta[idx + 1].exp()));
                idx += 2;
            }
            poles.push(term);
        }
        (weights, poles)
    }

    fn to_model(&self, theta: &[f64]) -> Result<FitSDModel> {
        let (weights, poles) = self.unpack(theta);
        let terms = weights
            .iter()
            .zip(&poles)
            .map(|(&w, ps)| {
                PoleTerm::new(w, ps.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        FitSDModel::new(self.n, terms)
    }

    /// `J(ω)` and `∂J/∂θ` in the log parametrization; everything is
    /// real on the real axis, so no complex arithmetic is needed.
    fn eval_with_gradient(&self, theta: &[f64], omega: f64, grad: &mut [f64]) -> f64 {
        let k = self.term_sizes.len();
        let scale = omega.powi(self.n as i32 - 1);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        let mut idx = k;
        for (term_i, &size) in self.term_sizes.iter().enumerate() {
            let p_k = theta[term_i].exp();
            // Products over 1/((ω∓Ω)²+γ²) and their factors.
            let mut prod_plus = 1.0f64;
            let mut prod_minus = 1.0f64;
            let base = idx;
            for j in 0..size {
                let om = theta[base + 2 * j].exp();
                let ga = theta[base + 2 * j + 1].exp();
                let dp = (omega - om) * (omega - om) + ga * ga;
                let dm = (omega + om) * (omega + om) + ga * ga;
                prod_plus /= dp;
                prod_minus /= dm;
            }
            let term_value = scale * p_k * (prod_plus - prod_minus);
            value += term_value;
            grad[term_i] = term_value; // ∂/∂ln p_k

            for j in 0..size {
                let om = theta[base + 2 * j].exp();
                let ga = theta[base + 2 * j + 1].exp();
                let dp = (omega - om) * (omega - om) + ga * ga;
                let dm = (omega + om) * (omega + om) + ga * ga;
                // ∂(1/d)/∂Ω = ±2(ω∓Ω)/d², chain through the product.
                let d_plus_om = prod_plus * 2.0 * (omega - om) / dp;
                let d_minus_om = -prod_minus * 2.0 * (omega + om) / dm;
                let d_plus_ga = -prod_plus * 2.0 * ga / dp;
                let d_minus_ga = -prod_minus * 2.0 * ga / dm;
                grad[base + 2 * j] = scale * p_k * (d_plus_om - d_minus_om) * om;
                grad[base + 2 * j + 1] = scale * p_k * (d_plus_ga - d_minus_ga) * ga;
            }
            idx += 2 * size;
        }
        value
    }
}

/// Samples of the target on the fit grid (tabulated targets are used
/// at exactly their own samples; `cfg.grid` applies to reference
/// targets only).
pub fn target_samples(target: &FitTarget, cfg: &FitConfig) -> Result<Vec<(f64, f64)>> {
    match target {
        FitTarget::Reference(sd) => {
            sd.validate()?;
            let grid = match &cfg.grid {
                Some(spec) => spec.build()?,
                None => {
                    let probe = logspace(1e-2, 1e5, 2400);
                    let peak = probe
                        .iter()
                        .cloned()
                        .max_by(|a, b| {
                            sd.value(*a).partial_cmp(&sd.value(*b)).unwrap()
                        })
                        .unwrap();
                    logspace(peak / 100.0, 20.0 * peak, 400)
                }
            };
            Ok(grid.into_iter().map(|w| (w, sd.value(w))).collect())
        }
        FitTarget::Table(TableTarget::Table { data }) => {
            if data.len() < 3 {
                return Err(Error::InvalidInput("tabulated target needs at least 3 samples".into()));
            }
            let mut pairs: Vec<(f64, f64)> = data.iter().map(|&[w, j]| (w, j)).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if pairs.iter().any(|&(w, j)| !w.is_finite() || w <= 0.0 || !j.is_finite() || j <= 0.0) {
                return Err(Error::InvalidInput(
                    "tabulated target must have positive frequencies and positive values".into(),
                ));
            }
            Ok(pairs)
        }
    }
}

/// Local maxima of the sampled target with prominence at least 1% of
/// the global maximum, tallest first, with a half-width estimate.
fn detect_peaks(samples: &[(f64, f64)]) -> Vec<(f64, f64, f64)> {
    let j_max = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for i in 1..samples.len() - 1 {
        let (w, j) = samples[i];
        if j >= samples[i - 1].1 && j > samples[i + 1].1 && j >= 0.01 * j_max {
            // Half width: walk out to J < J_peak/2.
            let mut left = samples[0].0;
            for k in (0..i).rev() {
                if samples[k].1 < 0.5 * j {
                    left = samples[k].0;
                    break;
                }
            }
            let mut right = *samples.last().map(|s| &s.0).unwrap();
            for pair in samples.iter().skip(i + 1) {
                if pair.1 < 0.5 * j {
                    right = pair.0;
                    break;
                }
            }
            let width = 0.5 * (right - left).max(w * 1e-2);
            peaks.push((w, width, j));
        }
    }
    peaks.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    peaks
}

/// Initial models: first the peak-seeded guess, then seeded random
/// starts with log-uniform pole positions over the grid span.
pub fn multistart_init(samples: &[(f64, f64)], cfg: &FitConfig) -> Result<Vec<FitSDModel>> {
    cfg.validate()?;
    if samples.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 samples".into()));
    }
    let layout = Layout { n: cfg.n, term_sizes: cfg.poles_per_term.clone() };
    let (w_lo, w_hi) = (samples[0].0, samples[samples.len() - 1].0);
    let peaks = detect_peaks(samples);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let log_span = (w_lo.ln(), w_hi.ln());
    let draw = |rng: &mut ChaCha8Rng| -> f64 { (rng.random_range(log_span.0..log_span.1)).exp() };

    let mut starts = Vec::with_capacity(cfg.multistarts);
    for start_idx in 0..cfg.multistarts {
        for attempt in 0..32 {
            // Assign peaks to pole slots term-major; fill the rest at
            // random.  Random starts (index > 0) skip the peak seeding.
            let mut pole_sets: Vec<Vec<Complex64>> = Vec::new();
            let mut peak_iter = peaks.iter();
            for &size in &cfg.poles_per_term {
                let mut ps = Vec::with_capacity(size);
                for _ in 0..size {
                    let seeded = if start_idx == 0 && attempt == 0 {
                        peak_iter.next().map(|&(w, width, _)| Complex64::new(w, width))
                    } else {
                        None
                    };
                    ps.push(seeded.unwrap_or_else(|| {
                        Complex64::new(draw(&mut rng), draw(&mut rng))
                    }));
                }
                pole_sets.push(ps);
            }
            // Prefactors by matching the target height at each term's
            // first pole position (unit-weight evaluation, then scale).
            let terms: Result<Vec<PoleTerm>> = pole_sets
                .into_iter()
                .map(|ps| {
                    let anchor = ps[0].re;
                    let j_t = interp_samples(samples, anchor);
                    let unit = PoleTerm::new(1.0, ps.clone())?;
                    let probe = FitSDModel::new(cfg.n, vec![unit])?;
                    let unit_val = probe.evaluate(anchor);
                    let p = if unit_val > 0.0 && j_t > 0.0 { j_t / unit_val } else { 1.0 };
                    PoleTerm::new(p, ps)
                })
                .collect();
            if let Ok(terms) = terms {
                if let Ok(model) = FitSDModel::new(cfg.n, terms) {
                    starts.push(model);
                    break;
                }
            }
            let _ = layout; // layout participates in packing later
        }
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput("could not build any valid initial model".into()));
    }
    Ok(starts)
}

fn interp_samples(samples: &[(f64, f64)], w: f64) -> f64 {
    if w <= samples[0].0 {
        return samples[0].1;
    }
    if w >= samples[samples.len() - 1].0 {
        return samples[samples.len() - 1].1;
    }
    let idx = samples.partition_point(|s| s.0 < w).max(1);
    let (x0, y0) = samples[idx - 1];
    let (x1, y1) = samples[idx];
    y0 + (y1 - y0) * (w - x0) / (x1 - x0)
}

/// Fit the pole-product family to a target.
///
/// Runs Levenberg-Marquardt from every multistart and returns the best
/// result; ties in cost break by fewest iterations, then by smallest
/// maximum prefactor.  When no start meets the tolerance the best
/// model so far is returned with `converged = false`.
pub fn fit_sd(target: &FitTarget, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let samples = target_samples(target, cfg)?;
    if samples.iter().any(|&(_, j)| !j.is_finite() || j <= 0.0) {
        return Err(Error::InvalidInput("target must be positive on the fit grid".into()));
    }
    let (w_j, w_jw2) = cfg.effective_weights();
    let (sw_j, sw_jw2) = (w_j.sqrt(), w_jw2.sqrt());
    let layout = Layout { n: cfg.n, term_sizes: cfg.poles_per_term.clone() };
    let n_params = layout.param_count();
    let m_res = samples.len() * ((w_j > 0.0) as usize + (w_jw2 > 0.0) as usize);

    let residuals = |theta: &[f64]| -> Vec<f64> {
        let mut scratch = vec![0.0; n_params];
        let mut r = Vec::with_capacity(m_res);
        for &(w, j_t) in &samples {
            let j_fit = layout.eval_with_gradient(theta, w, &mut scratch);
            if w_j > 0.0 {
                r.push(sw_j * (j_fit - j_t));
            }
            if w_jw2 > 0.0 {
                r.push(sw_jw2 * (j_fit - j_t) / (w * w));
            }
        }
        r
    };
    let jacobian = |theta: &[f64]| -> Vec<f64> {
        let mut grad = vec![0.0; n_params];
        let mut jac = Vec::with_capacity(m_res * n_params);
        for &(w, _) in &samples {
            layout.eval_with_gradient(theta, w, &mut grad);
            if w_j > 0.0 {
                jac.extend(grad.iter().map(|g| sw_j * g));
            }
            if w_jw2 > 0.0 {
                jac.extend(grad.iter().map(|g| sw_jw2 * g / (w * w)));
            }
        }
        jac
    };

    let opts = LmOptions {
        max_iterations: cfg.max_iter,
        cost_tolerance: cfg.tol,
        gradient_tolerance: 1e-14,
    };
    // Box constraints in log space keep weakly identified poles from
    // escaping to unphysical magnitudes when the term budget exceeds
    // what the target needs.
    let (w_lo, w_hi) = (samples[0].0, samples[samples.len() - 1].0);
    let k = cfg.poles_per_term.len();
    let mut lower = vec![-80.0; n_params];
    let mut upper = vec![80.0; n_params];
    for b in lower.iter_mut().skip(k) {
        *b = (w_lo / 30.0).ln();
    }
    for b in upper.iter_mut().skip(k) {
        *b = (w_hi * 30.0).ln();
    }
    let starts = multistart_init(&samples, cfg)?;
    let mut best: Option<(LmOutcome, FitSDModel)> = None;
    for start in &starts {
        let outcome = lm::minimize_bounded(
            residuals,
            jacobian,
            &layout.pack(start),
            Some((&lower, &upper)),
            &opts,
        );
        let model = match layout.to_model(&outcome.params) {
            Ok(m) => m,
            Err(_) => continue, // degenerate poles; drop this start
        };
        let better = match &best {
            None => true,
            Some((cur, cur_model)) => {
                let max_p = |m: &FitSDModel| {
                    m.terms().iter().map(|t| t.weight()).fold(0.0, f64::max)
                };
                (outcome.cost, outcome.iterations, max_p(&model))
                    < (cur.cost, cur.iterations, max_p(cur_model))
            }
        };
        if better {
            best = Some((outcome, model));
        }
    }
    let (outcome, model) =
        best.ok_or_else(|| Error::InvalidInput("every multistart collapsed to an invalid model".into()))?;

    let mut res_j = 0.0;
    let mut res_jw2 = 0.0;
    for &(w, j_t) in &samples {
        let j_fit = model.evaluate(w);
        res_j += (j_fit - j_t) * (j_fit - j_t);
        let d2 = (j_fit - j_t) / (w * w);
        res_jw2 += d2 * d2;
    }
    Ok(FitResult {
        model,
        residual_j: res_j.sqrt(),
        residual_jw2: res_jw2.sqrt(),
        iterations: outcome.iterations,
        converged: outcome.converged,
    })
}
