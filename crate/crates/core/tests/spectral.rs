mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use whitham_core::kernel::{KernelEvaluator, PeriodizedKernel};
use whitham_core::spectral::{
    apply_l, cosine_analysis, cosine_synthesis, jacobian_action, steady_residual,
    EvenPeriodicFunction, PeriodicGrid,
};

fn random_profile(grid: &PeriodicGrid, rng: &mut ChaCha8Rng, decay: f64) -> EvenPeriodicFunction {
    let coeffs = (0..=grid.modes())
        .map(|k| rng.gen_range(-1.0..1.0) * (-(k as f64) / decay).exp())
        .collect();
    EvenPeriodicFunction::from_coeffs(grid, coeffs).unwrap()
}

#[test]
fn multiplier_matches_convolution_with_periodized_kernel() {
    let grid = PeriodicGrid::new(2.0 * PI, 256).unwrap();
    let pk = PeriodizedKernel::new(KernelEvaluator::default(), 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_profile(&grid, &mut rng, 3.0);
    let lf = apply_l(&f);
    let nodes = grid.nodes();
    for j in (0..256).step_by(17) {
        let q = common::convolve_by_quadrature(&pk, &f, nodes[j], 200);
        assert!((q - lf.values()[j]).abs() < 1e-6, "node {j}: {q} vs {}", lf.values()[j]);
    }
}

#[test]
fn jacobian_taylor_remainder_is_second_order() {
    let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi = random_profile(&grid, &mut rng, 4.0);
    let dphi = random_profile(&grid, &mut rng, 4.0);
    let (mu, dmu) = (0.8, 0.3);
    let base = steady_residual(&phi, mu);
    let jv = jacobian_action(&phi, mu, &dphi, dmu).unwrap();
    let remainder = |h: f64| {
        let shifted: Vec<f64> = phi.coeffs().iter().zip(dphi.coeffs()).map(|(a, d)| a + h * d).collect();
        let r = steady_residual(&EvenPeriodicFunction::from_coeffs(&grid, shifted).unwrap(), mu + h * dmu);
        r.values()
            .iter()
            .zip(base.values())
            .zip(jv.values())
            .map(|((r, b), j)| (r - b - h * j).abs())
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = (0..5).map(|i| remainder(0.1 / 2f64.powi(i))).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order}");
    }
}

#[test]
fn quadratic_term_alias_free_against_double_resolution() {
    let coarse = PeriodicGrid::new(5.0, 48).unwrap();
    let fine = PeriodicGrid::new(5.0, 96).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // modes below N/3
    let coeffs: Vec<f64> = (0..=24).map(|k| if k < 16 { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
    let phi = EvenPeriodicFunction::from_coeffs(&coarse, coeffs).unwrap();
    let r_coarse = steady_residual(&phi, 0.7);
    let r_fine = steady_residual(&phi.resample(&fine).unwrap(), 0.7);
    for k in 0..=24 {
        assert!((r_coarse.coeffs()[k] - r_fine.coeffs()[k]).abs() < 1e-13, "mode {k}");
    }
}

#[test]
fn random_nodal_round_trip() {
    let grid = PeriodicGrid::new(3.0, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let half: Vec<f64> = (0..=64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let full: Vec<f64> = (0..128).map(|j: usize| half[j.abs_diff(64)]).collect();
    let back = cosine_synthesis(&grid, &cosine_analysis(&grid, &full).unwrap()).unwrap();
    for (a, b) in full.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn multiplier_attenuates_every_mode(seed in any::<u64>()) {
        let grid = PeriodicGrid::new(7.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_profile(&grid, &mut rng, 5.0);
        let lf = apply_l(&f);
        for (k, (b, a)) in lf.coeffs().iter().zip(f.coeffs()).enumerate() {
            let xi = 2.0 * PI * k as f64 / 7.0;
            prop_assert!(b.abs() <= a.abs() + 1e-300);
            prop_assert!(b.abs() <= (1.0 + xi).powf(-0.5) * 1.5 * a.abs() + 1e-300);
        }
    }

    #[test]
    fn residual_and_operator_preserve_evenness(seed in any::<u64>(), mu in 0.1f64..1.5) {
        let grid = PeriodicGrid::new(4.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_profile(&grid, &mut rng, 3.0);
        for g in [apply_l(&f), steady_residual(&f, mu)] {
            let v = g.values();
            for j in 1..32 {
                prop_assert!((v[j] - v[32 - j]).abs() < 1e-13);
            }
        }
    }
}
