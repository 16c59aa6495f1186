use std::f64::consts::PI;

use proptest::prelude::*;
use whitham_core::solver::{
    bifurcation_speed, continue_in_lambda, default_nodes, initial_guess, newton_solve, refine,
    Continuation, PeriodicWave, SolverConfig,
};
use whitham_core::spectral::{jacobian_action, EvenPeriodicFunction, PeriodicGrid};
use whitham_core::verify::check_periodic_bounds;
use whitham_core::Error;

// μ along the P = 2π branch at N = 2048, recorded from a converged run.
const BRANCH_FIXTURE: [(f64, f64); 9] = [
    (0.1, 0.8629188364749),
    (0.2, 0.8391887694298),
    (0.3, 0.8139366049901),
    (0.4, 0.7934811996514),
    (0.5, 0.7790627176103),
    (0.6, 0.7703633185682),
    (0.7, 0.7666119314446),
    (0.8, 0.7665577062383),
    (0.9, 0.7679824810216),
];

fn solve(period: f64, n: usize, lambda: f64) -> PeriodicWave {
    let grid = PeriodicGrid::new(period, n).unwrap();
    Continuation::new(&grid, &SolverConfig::default())
        .advance_to(lambda)
        .unwrap()
}

fn assert_wave_invariants(w: &PeriodicWave) {
    assert!((w.crest() - 0.5 * w.lambda * w.mu).abs() <= 1e-12 * w.mu.max(1.0));
    for c in check_periodic_bounds(w, 1e-10) {
        assert!(c.passed, "λ = {}: {} margin {}", w.lambda, c.name, c.margin);
    }
}

#[test]
fn bifurcation_speed_of_first_mode() {
    let m1 = 1f64.tanh().sqrt();
    assert!((bifurcation_speed(2.0 * PI, 1).unwrap() - m1).abs() < 1e-15);
    assert!((m1 - 0.872_693_7).abs() < 1e-7);
    assert!((bifurcation_speed(1e7, 1).unwrap() - 1.0).abs() < 1e-10);
    assert!(bifurcation_speed(0.0, 1).is_err());
}

#[test]
fn bifurcation_speed_is_eigenvalue_of_linearization_at_zero() {
    // (L − μ)cos(2πx/P) at φ = 0, read off from the first cosine coefficient
    let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
    let zero = EvenPeriodicFunction::zeros(&grid);
    let mut e1 = vec![0.0; grid.modes() + 1];
    e1[1] = 1.0;
    let e1 = EvenPeriodicFunction::from_coeffs(&grid, e1).unwrap();
    let image = jacobian_action(&zero, 0.0, &e1, 0.0).unwrap();
    let eigen = image.coeffs()[1];
    assert!(image.coeffs().iter().enumerate().all(|(k, c)| k == 1 || c.abs() < 1e-14));
    assert!((eigen - bifurcation_speed(2.0 * PI, 1).unwrap()).abs() < 1e-14);
    let shifted = jacobian_action(&zero, eigen, &e1, 0.0).unwrap();
    assert!(shifted.sup_norm() < 1e-14);
}

#[test]
fn zero_amplitude_guess() {
    let grid = PeriodicGrid::new(5.0, 32).unwrap();
    let (phi, mu) = initial_guess(&grid, 0.0).unwrap();
    assert_eq!(phi.sup_norm(), 0.0);
    assert_eq!(mu, bifurcation_speed(5.0, 1).unwrap());
    assert!(initial_guess(&grid, 0.06).is_err());
}

#[test]
fn guess_is_even() {
    let grid = PeriodicGrid::new(5.0, 32).unwrap();
    let (phi, _) = initial_guess(&grid, 0.03).unwrap();
    let v = phi.values();
    assert!((1..32).all(|j| (v[j] - v[32 - j]).abs() < 1e-16));
}

#[test]
fn small_height_converges_quickly_from_guess() {
    let grid = PeriodicGrid::new(2.0 * PI, 512).unwrap();
    let mu0 = bifurcation_speed(2.0 * PI, 1).unwrap();
    let (guess, mu0) = initial_guess(&grid, 0.025 * mu0).unwrap();
    let w = newton_solve(&guess, mu0, 0.05, &SolverConfig::default()).unwrap();
    assert!(w.iterations <= 10, "{} iterations", w.iterations);
    assert!(w.residual_norm <= 1e-11);
    assert_wave_invariants(&w);
}

#[test]
fn low_wave_is_subcritical_with_prescribed_height() {
    let w = solve(2.0 * PI, 512, 0.1);
    assert!(w.mu > 0.0 && w.mu < 1.0);
    assert_wave_invariants(&w);
}

#[test]
fn speed_stable_under_doubling() {
    let a = solve(2.0 * PI, 512, 0.5);
    let b = solve(2.0 * PI, 1024, 0.5);
    assert!((a.mu - b.mu).abs() < 1e-8, "{} vs {}", a.mu, b.mu);
}

// At P = 64 the λ = 0.9 crest needs about 2·10⁴ nodes before the cosine
// coefficients reach roundoff, so the sandwich is checked against the
// truncation level given by the trailing coefficients.
#[test]
fn high_wave_on_long_period_obeys_sandwich() {
    let cfg = SolverConfig::default();
    let coarse = solve(64.0, 2048, 0.9);
    let fine = refine(&coarse, 4096, &cfg).unwrap();
    let worst = |w: &PeriodicWave| {
        check_periodic_bounds(w, 0.0)
            .iter()
            .filter(|c| c.name == "lower_bound" || c.name == "upper_bound")
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    };
    let trailing = |w: &PeriodicWave| {
        let c = w.profile.coeffs();
        c[c.len() - c.len() / 8..].iter().map(|v| v.abs()).sum::<f64>()
    };
    assert!(fine.residual_norm <= 1e-10);
    assert!((fine.crest() - 0.45 * fine.mu).abs() < 1e-12);
    assert!(fine.mu > 0.0 && fine.mu <= 1.0);
    for w in [&coarse, &fine] {
        assert!(worst(w) >= -trailing(w), "margin {} vs truncation {}", worst(w), trailing(w));
    }
    assert!(worst(&fine) > worst(&coarse));
}

#[test]
fn branch_matches_fixture_and_passes_bounds() {
    let grid = PeriodicGrid::new(2.0 * PI, 2048).unwrap();
    let lambdas: Vec<f64> = BRANCH_FIXTURE.iter().map(|p| p.0).collect();
    let branch = continue_in_lambda(&grid, &lambdas, &SolverConfig::default()).unwrap();
    assert_eq!(branch.points.len(), 9);
    for (w, (l, mu)) in branch.points.iter().zip(BRANCH_FIXTURE) {
        assert_eq!(w.lambda, l);
        assert!((w.mu - mu).abs() < 1e-9, "λ = {l}: {} vs {mu}", w.mu);
        assert!(w.residual_norm < 1e-10);
        assert_wave_invariants(w);
    }
    // μ falls until about λ = 0.8 and then rises again
    let mus: Vec<f64> = branch.points.iter().map(|w| w.mu).collect();
    assert!(mus[..8].windows(2).all(|p| p[1] < p[0]));
    assert!(mus[8] > mus[7]);
}

#[test]
fn single_point_branch_equals_direct_solve() {
    let grid = PeriodicGrid::new(2.0 * PI, 256).unwrap();
    let cfg = SolverConfig::default();
    let branch = continue_in_lambda(&grid, &[0.1], &cfg).unwrap();
    let mu0 = bifurcation_speed(2.0 * PI, 1).unwrap();
    let (guess, mu0) = initial_guess(&grid, 0.05 * mu0).unwrap();
    let direct = newton_solve(&guess, mu0, 0.1, &cfg).unwrap();
    // both stop once the residual is below 1e-11
    assert!((branch.points[0].mu - direct.mu).abs() < 1e-10);
    let gap = branch.points[0]
        .profile
        .values()
        .iter()
        .zip(direct.profile.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-10);
}

#[test]
fn decreasing_grid_is_rejected() {
    let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
    assert!(continue_in_lambda(&grid, &[0.3, 0.2], &SolverConfig::default()).is_err());
}

#[test]
fn refined_wave_restricts_to_original() {
    let cfg = SolverConfig::default();
    let w = solve(2.0 * PI, 512, 0.5);
    let r = refine(&w, 1024, &cfg).unwrap();
    assert!(r.residual_norm <= cfg.tol);
    let gap = (0..512)
        .map(|j| (r.profile.values()[2 * j] - w.profile.values()[j]).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-8, "{gap}");
}

#[test]
fn refinement_leaves_smooth_speed_unchanged() {
    let cfg = SolverConfig::default();
    for lambda in [0.3, 0.5, 0.7] {
        let w = solve(2.0 * PI, default_nodes(lambda), lambda);
        let r = refine(&w, 2 * w.n(), &cfg).unwrap();
        assert!((r.mu - w.mu).abs() < 1e-10, "λ = {lambda}: {:e}", (r.mu - w.mu).abs());
    }
}

#[test]
fn refine_requires_more_nodes() {
    let w = solve(2.0 * PI, 64, 0.2);
    assert!(matches!(refine(&w, 64, &SolverConfig::default()), Err(Error::Shape(_))));
}

#[test]
fn newton_rejects_bad_inputs() {
    let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
    let (guess, mu) = initial_guess(&grid, 0.01).unwrap();
    let cfg = SolverConfig::default();
    assert!(matches!(newton_solve(&guess, mu, 0.0, &cfg), Err(Error::Domain(_))));
    assert!(matches!(newton_solve(&guess, mu, 1.2, &cfg), Err(Error::Domain(_))));
    let bad = SolverConfig { tol: 0.0, ..cfg };
    assert!(newton_solve(&guess, mu, 0.1, &bad).is_err());
}

#[test]
fn stall_reports_last_good_height() {
    let grid = PeriodicGrid::new(2.0 * PI, 64).unwrap();
    let cfg = SolverConfig {
        max_iter: 2,
        step_floor: 0.02,
        ..SolverConfig::default()
    };
    match continue_in_lambda(&grid, &[0.5], &cfg) {
        Err(Error::ContinuationStall { target, last_good }) => {
            assert_eq!(target, 0.5);
            assert!(last_good < 0.5);
        }
        other => panic!("expected a stall, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn bifurcation_speed_increases_with_period(p in 0.5f64..200.0, f in 1.01f64..3.0, k in 1usize..4) {
        let a = bifurcation_speed(p, k).unwrap();
        let b = bifurcation_speed(p * f, k).unwrap();
        prop_assert!(b > a && b < 1.0);
    }
}
