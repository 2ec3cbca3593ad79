//! Oracle-equivalence sweep: random small models against brute-force
//! quadrature at three temperatures, with expansion orders at the
//! published magnitudes (large near 4 K, one term at 300 K).

use bcfkit::bcf::{decompose, exact_bcf_grid};
use bcfkit::cothexp::CothExpansion;
use bcfkit::specdens::{FitSDModel, PoleTerm};
use bcfkit::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(rng: &mut ChaCha8Rng) -> FitSDModel {
    let n = [1u32, 3, 5][rng.random_range(0..3)];
    // Enough poles for an ω^{-3} falloff or faster: marginal 1/ω tails
    // have a logarithmically divergent α(0), which the |α(0)|-scaled
    // comparison cannot normalize.
    let min_poles = (n as usize + 1) / 2;
    let kappa = rng.random_range(min_poles..=3);
    let poles: Vec<Complex64> = (0..kappa)
        .map(|_| Complex64::new(rng.random_range(1.0..250.0), rng.random_range(0.5..120.0)))
        .collect();
    let weight = rng.random_range(0.1..50.0);
    match FitSDModel::new(n, vec![PoleTerm::new(weight, poles).unwrap()]) {
        Ok(m) => m,
        Err(_) => random_model(rng), // coincident poles; redraw
    }
}

#[test]
fn random_models_match_the_quadrature_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let ts: Vec<f64> = (0..11).map(|i| i as f64 * 0.02).collect();
    let cases = [(4.0, 14usize), (77.0, 3), (300.0, 1)];
    for model_idx in 0..20 {
        let model = random_model(&mut rng);
        for (t_kelvin, l) in cases {
            let bcf = decompose(&model, &CothExpansion::pade(l).unwrap(), t_kelvin).unwrap();
            let exact = exact_bcf_grid(&model, t_kelvin, &ts).unwrap();
            let scale = exact[0].norm();
            let worst = ts
                .iter()
                .zip(&exact)
                .map(|(&t, ex)| (bcf.evaluate(t).unwrap() - ex).norm() / scale)
                .fold(0.0, f64::max);
            assert!(
                worst <= 1e-2,
                "model {model_idx} ({:?}) at {t_kelvin} K, L={l}: deviation {worst:.3e}",
                model
            );
        }
    }
}
