//! Acceptance suite: every criterion prints one pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use bcfkit::bcf::{decompose, exact_bcf_grid};
use bcfkit::cothexp::{CothExpansion, COTH_MACLAURIN};
use bcfkit::fitting::{fit_sd, FitConfig, FitTarget};
use bcfkit::grid::logspace;
use bcfkit::lineshape::{g_from_exponential, g_from_sd_quadrature};
use bcfkit::specdens::{
    huang_rhys, reorganization_energy, FitSDModel, PoleTerm, ReferenceSD, SpectralDensity,
};
use bcfkit::special::coth_real;
use bcfkit::spectra::{absorption, compare_spectra, FftConfig, Spectrum, Window};
use bcfkit::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(number: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {verdict}  {name}  [{detail}]");
    assert!(pass, "criterion {number:02} failed: {name} ({detail})");
}

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

fn log_normal() -> ReferenceSD {
    ReferenceSD::LogNormal { s: 0.3, sigma: 0.7, omega_c: 38.0 }
}

fn damped_vibration() -> ReferenceSD {
    ReferenceSD::DampedVibration { eta: 0.3, cutoff: 100.0, omega: 180.0, huang_rhys: 0.03 }
}

fn random_model(rng: &mut ChaCha8Rng) -> FitSDModel {
    let n = [1u32, 3, 5][rng.random_range(0..3)];
    let min_poles = (n as usize).div_ceil(2) + ((n == 1) as usize); // decay guaranteed
    let kappa = rng.random_range(min_poles.max(1)..=3.max(min_poles));
    let poles: Vec<Complex64> = (0..kappa)
        .map(|_| {
            Complex64::new(rng.random_range(1.0..250.0), rng.random_range(0.5..120.0))
        })
        .collect();
    let weight = rng.random_range(0.1..50.0);
    FitSDModel::new(n, vec![PoleTerm::new(weight, poles).unwrap()]).unwrap()
}

#[test]
fn criterion_01_pade_order_one_closed_form() {
    let c = CothExpansion::pade(1).unwrap();
    let t = c.terms()[0];
    let xi_err = (t.pole - Complex64::new(0.0, 15.0f64.sqrt())).norm();
    let eta_err = (t.residue - 2.5).abs();
    // Maclaurin of C - 1/x through x³ against coth's series.
    let c1_err = (c.maclaurin_odd_coefficient(1) - COTH_MACLAURIN[0]).abs() / COTH_MACLAURIN[0];
    let c3_err =
        (c.maclaurin_odd_coefficient(2) - COTH_MACLAURIN[1]).abs() / COTH_MACLAURIN[1].abs();
    let pass = xi_err <= 1e-12 && eta_err <= 1e-12 && c1_err <= 1e-10 && c3_err <= 1e-10;
    report(
        1,
        "pade order-1 closed form and series match",
        pass,
        &format!("|ξ-i√15|={xi_err:.1e}, |η-5/2|={eta_err:.1e}, series errs {c1_err:.1e}/{c3_err:.1e}"),
    );
}

#[test]
fn criterion_02_pade_dominates_matsubara() {
    let grid = logspace(0.1000001, 10.0, 400);
    let mut dominance = true;
    let mut worst = (0usize, 0.0f64, 0.0f64);
    for l in 1..=10usize {
        let pade = CothExpansion::pade(l).unwrap();
        let mats = CothExpansion::matsubara(l).unwrap();
        for &x in &grid {
            let exact = coth_real(x);
            let ep = ((pade.evaluate_real(x).unwrap() - exact) / exact).abs();
            let em = ((mats.evaluate_real(x).unwrap() - exact) / exact).abs();
            if ep > em + 1e-13 {
                dominance = false;
                worst = (l, ep, em);
            }
        }
    }
    // Padé L=5 accuracy on (0, 2].
    let pade5 = CothExpansion::pade(5).unwrap();
    let max_err = logspace(1e-3, 2.0, 1500)
        .into_iter()
        .map(|x| {
            let exact = coth_real(x);
            ((pade5.evaluate_real(x).unwrap() - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    let pass = dominance && max_err <= 1e-6;
    report(
        2,
        "pade error <= matsubara error pointwise, pade-5 <= 1e-6 on (0,2]",
        pass,
        &format!("dominance={dominance} (worst L={} {:.1e} vs {:.1e}), pade5 max={max_err:.2e}", worst.0, worst.1, worst.2),
    );
}

#[test]
fn criterion_03_zero_temperature_lorentzian_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let omega = rng.random_range(0.5..300.0);
        let gamma = rng.random_range(0.05..50.0);
        let p = rng.random_range(0.1..100.0);
        let t = rng.random_range(0.0..3.0 / gamma);
        let model =
            FitSDModel::new(1, vec![PoleTerm::new(p, vec![Complex64::new(omega, gamma)]).unwrap()])
                .unwrap();
        let bcf = decompose(&model, &CothExpansion::zero_temperature(), 0.0).unwrap();
        let got = bcf.evaluate(t).unwrap().im;
        let want = -(p / gamma) * (omega * t).sin() * (-gamma * t).exp();
        let scaled = (got - want).abs() / 1.0f64.max(p / gamma);
        worst = worst.max(scaled);
    }
    report(
        3,
        "b(t) = -(p/γ)sin(Ωt)e^{-γt} at 100 random points",
        worst <= 1e-12,
        &format!("worst scaled deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_04_oracle_equivalence_at_paper_operating_points() {
    let model = table_damped_mode();
    let ts: Vec<f64> = (0..41).map(|i| i as f64 * 0.005).collect();
    let mut pass = true;
    let mut detail = String::new();
    for (t_kelvin, l, want_modes) in [(4.0, 11usize, 17usize), (77.0, 2, 8), (300.0, 1, 7)] {
        let bcf = decompose(&model, &CothExpansion::pade(l).unwrap(), t_kelvin).unwrap();
        let exact = exact_bcf_grid(&model, t_kelvin, &ts).unwrap();
        let scale = exact[0].norm();
        let worst = ts
            .iter()
            .zip(&exact)
            .map(|(&t, &ex)| (bcf.evaluate(t).unwrap() - ex).norm() / scale)
            .fold(0.0, f64::max);
        pass &= worst <= 1e-2 && bcf.mode_count() == want_modes;
        detail.push_str(&format!(
            "{t_kelvin}K/L{l}: dev {worst:.1e}, M={}; ",
            bcf.mode_count()
        ));
    }
    report(4, "exponential vs quadrature BCF, mode counts 17/8/7", pass, detail.trim_end());
}

#[test]
fn criterion_05_imaginary_part_expansion_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let ts: Vec<f64> = (0..21).map(|i| i as f64 * 0.01).collect();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let model = random_model(&mut rng);
        let variants = [
            decompose(&model, &CothExpansion::pade(1).unwrap(), 77.0).unwrap(),
            decompose(&model, &CothExpansion::pade(7).unwrap(), 77.0).unwrap(),
            decompose(&model, &CothExpansion::matsubara(3).unwrap(), 77.0).unwrap(),
            decompose(&model, &CothExpansion::matsubara(25).unwrap(), 77.0).unwrap(),
        ];
        let scale = variants[0].amplitude_sum().norm().max(1.0);
        for &t in &ts {
            let reference = variants[0].evaluate(t).unwrap().im;
            for v in &variants[1..] {
                worst = worst.max((v.evaluate(t).unwrap().im - reference).abs() / scale);
            }
        }
    }
    report(
        5,
        "Im α identical across expansion schemes and orders",
        worst <= 1e-10,
        &format!("worst scaled spread {worst:.2e}"),
    );
}

#[test]
fn criterion_06_huang_rhys_of_log_normal_is_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = rng.random_range(0.02..2.0);
        let sigma = rng.random_range(0.2..1.4);
        let omega_c = rng.random_range(5.0..500.0);
        let sd = ReferenceSD::LogNormal { s, sigma, omega_c };
        let x = huang_rhys(&sd).unwrap();
        worst = worst.max((x - s).abs() / s);
    }
    report(
        6,
        "huang_rhys(log-normal) = S for 20 random parameter sets",
        worst <= 1e-6,
        &format!("worst relative deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_07_drude_lorentz_reorganization_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let lambda = rng.random_range(0.1..30.0);
        let gamma = rng.random_range(1.0..500.0);
        let sd = ReferenceSD::DrudeLorentz { lambda, gamma };
        let e = reorganization_energy(&sd).unwrap();
        worst = worst.max((e - std::f64::consts::PI * lambda).abs() / (std::f64::consts::PI * lambda));
    }
    report(
        7,
        "reorganization energy of Drude-Lorentz = πλ",
        worst <= 1e-8,
        &format!("worst relative deviation {worst:.2e}"),
    );
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[test]
fn criterion_08_t0_weak_coupling_spectrum() {
    let sd = log_normal().scaled(1e-3);
    let x = huang_rhys(&sd).unwrap();
    let fft = FftConfig { gamma_add: 0.0, ..FftConfig::for_max_feature(120.0) };
    let g = g_from_sd_quadrature(&sd, 0.0, &fft.time_grid()).unwrap();
    let spectrum = absorption(&g, &fft).unwrap();
    let dw = spectrum.delta_weight().expect("T=0 spectrum must expose the delta weight");
    let dw_err = (dw - (1.0 - x)).abs() / (1.0 - x);

    // Correlate the sideband (outside ±3 bins of the ZPL) with J/(πω²).
    let d_omega = spectrum.omega_grid()[1] - spectrum.omega_grid()[0];
    let mut fft_side = Vec::new();
    let mut reference = Vec::new();
    for (w, v) in spectrum.omega_grid().iter().zip(spectrum.values()) {
        if *w > 3.0 * d_omega && *w < 2000.0 {
            fft_side.push(*v);
            reference.push(sd.value(*w) / (std::f64::consts::PI * w * w));
        }
    }
    let r = pearson(&fft_side, &reference);
    let pass = r >= 0.999 && dw_err <= 0.01;
    report(
        8,
        "T=0 weak-coupling: sideband ∝ J/(πω²), delta weight 1-X",
        pass,
        &format!("pearson r = {r:.6}, delta-weight rel err {dw_err:.2e}"),
    );
}

struct LogNormalFits {
    by_n: Vec<(u32, FitSDModel)>,
}

fn fit_log_normal_suite() -> LogNormalFits {
    // Pole budgets follow the published fits: 4 ohmic terms of 2 poles
    // for n=1, one 3-pole term for n=3 and n=5.
    let cases: [(u32, Vec<usize>, u64, usize); 3] =
        [(1, vec![2, 2, 2, 2], 11, 28), (3, vec![3], 21, 16), (5, vec![3], 31, 16)];
    let target = FitTarget::Reference(log_normal());
    let mut by_n = Vec::new();
    for (n, poles, seed, starts) in cases {
        let cfg = FitConfig {
            n,
            poles_per_term: poles,
            weight_j: None,
            weight_jw2: None,
            grid: None,
            multistarts: starts,
            seed,
            max_iter: 400,
            tol: 1e-12,
        };
        let result = fit_sd(&target, &cfg).unwrap();
        by_n.push((n, result.model));
    }
    LogNormalFits { by_n }
}

fn spectrum_from_model(model: &FitSDModel, t_kelvin: f64, l: usize, fft: &FftConfig) -> Spectrum {
    let bcf = decompose(model, &CothExpansion::pade(l).unwrap(), t_kelvin).unwrap();
    let g = g_from_exponential(&bcf, &fft.time_grid());
    absorption(&g, fft).unwrap()
}

#[test]
fn criterion_09_low_frequency_scaling_governs_spectra() {
    let sd = log_normal();
    let fits = fit_log_normal_suite();
    // Expansion orders per temperature for n = 1, 3, 5 (published
    // budgets for the log-normal fits).
    let l_table = [(4.0, [11usize, 14, 15]), (77.0, [2, 2, 3]), (300.0, [1, 1, 1])];
    let fft = FftConfig { gamma_add: 1.0, ..FftConfig::for_max_feature(120.0) };

    let mut pass = true;
    let mut detail = String::new();
    for (t_kelvin, ls) in l_table {
        let g_exact = g_from_sd_quadrature(&sd, t_kelvin, &fft.time_grid()).unwrap();
        let exact = absorption(&g_exact, &fft).unwrap();
        let mut distances = Vec::new();
        for ((n, model), l) in fits.by_n.iter().zip(ls) {
            let spec = spectrum_from_model(model, t_kelvin, l, &fft);
            let max_v = spec.values().iter().cloned().fold(0.0, f64::max);
            let min_v = spec.values().iter().cloned().fold(0.0, f64::min);
            if min_v < -1e-3 * max_v {
                pass = false;
                detail.push_str(&format!("negative dip n={n} at {t_kelvin}K; "));
            }
            distances.push(compare_spectra(&exact, &spec).l1);
        }
        if !(distances[0] >= distances[1] && distances[1] >= distances[2]) {
            pass = false;
        }
        // The ohmic misfit of this superohmic target is gross, not
        // marginal (the published failure mode).
        if t_kelvin == 77.0 && distances[0] < 0.1 {
            pass = false;
            detail.push_str("n=1 misfit not visible; ");
        }
        detail.push_str(&format!(
            "{t_kelvin}K: L1(n=1,3,5) = {:.3}/{:.3}/{:.3}; ",
            distances[0], distances[1], distances[2]
        ));
    }
    report(9, "spectrum error nonincreasing along n = 1 → 3 → 5", pass, detail.trim_end());
}

#[test]
fn criterion_10_symmetry_and_decay() {
    let model = table_damped_mode();
    let bcf = decompose(&model, &CothExpansion::pade(2).unwrap(), 77.0).unwrap();
    let mut symmetric = true;
    let mut bounded = true;
    for i in 0..50 {
        let t = (i + 1) as f64 * 0.01;
        let plus = bcf.evaluate(t).unwrap();
        let minus = bcf.evaluate_symmetric(-t);
        // α(-t) = α(t)* holds exactly (bitwise) by construction for t > 0.
        symmetric &= minus == plus.conj();
        bounded &= plus.norm() <= bcf.decay_bound(t) * (1.0 + 1e-12);
    }
    // At t = 0 the identity reduces to realness of α(0), up to roundoff.
    let origin = bcf.amplitude_sum();
    bounded &= origin.norm() <= bcf.decay_bound(0.0) * (1.0 + 1e-12);
    symmetric &= origin.im.abs() <= 1e-10 * origin.norm();
    report(
        10,
        "α(-t) = α(t)* exactly; |α| within the decay envelope",
        symmetric && bounded,
        &format!("symmetric={symmetric}, bounded={bounded}"),
    );
}

#[test]
fn criterion_11_damped_vibration_fit_regression() {
    let cfg = FitConfig {
        n: 5,
        poles_per_term: vec![3],
        weight_j: None,
        weight_jw2: None,
        grid: None,
        multistarts: 12,
        seed: 12345,
        max_iter: 300,
        tol: 1e-12,
    };
    let result = fit_sd(&FitTarget::Reference(damped_vibration()), &cfg).unwrap();
    let sd = damped_vibration();
    let grid = logspace(1.0, 1000.0, 600);
    let (mut num, mut den) = (0.0, 0.0);
    for &w in &grid {
        let d = result.model.evaluate(w) - sd.value(w);
        num += d * d;
        den += sd.value(w) * sd.value(w);
    }
    let rel_l2 = (num / den).sqrt();
    let reference_pole = Complex64::new(183.0, 9.17);
    let closest = result
        .model
        .terms()
        .iter()
        .flat_map(|t| t.poles().iter())
        .map(|p| (p - reference_pole).norm())
        .fold(f64::INFINITY, f64::min);
    let pass = rel_l2 <= 0.05 && closest <= 0.1 * reference_pole.norm();
    report(
        11,
        "refit lands a pole near 183+9.17i with L2 error <= 5%",
        pass,
        &format!("relative L2 {rel_l2:.4}, pole distance {closest:.2} cm^-1"),
    );
}

#[test]
fn criterion_12_lineshape_second_difference() {
    let model = table_damped_mode();
    let bcf = decompose(&model, &CothExpansion::pade(2).unwrap(), 77.0).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for t0 in [0.008, 0.02, 0.05] {
        let second_diff = |h: f64| {
            let g = g_from_exponential(&bcf, &[t0 - h, t0, t0 + h]);
            let v = g.values();
            (v[0] - 2.0 * v[1] + v[2]) / (h * h)
        };
        let alpha = bcf.evaluate(t0).unwrap();
        let e1 = (second_diff(2e-4) - alpha).norm();
        let e2 = (second_diff(1e-4) - alpha).norm();
        let ratio = e1 / e2;
        pass &= (ratio - 4.0).abs() <= 0.5;
        detail.push_str(&format!("t={t0}: ratio {ratio:.2}; "));
    }
    report(
        12,
        "g''(t) = α(t) with second-order convergence under Δt halving",
        pass,
        detail.trim_end(),
    );
}

// The Hann window variant exercises the documented alternative to
// artificial broadening on the same pipeline surfaces.
#[test]
fn windowed_transform_smoke() {
    let sd = log_normal();
    let fft = FftConfig {
        n_points: 1 << 16,
        dt: 1e-3,
        gamma_add: 0.0,
        window: Window::Hann,
    };
    let g = g_from_sd_quadrature(&sd, 77.0, &fft.time_grid()).unwrap();
    let spec = absorption(&g, &fft).unwrap();
    assert!((spec.area() - 2.0 * std::f64::consts::PI).abs() < 1e-6);
}
