//! Periodic waves of prescribed relative height.
//!
//! Unknowns are the cosine coefficients a_0..a_M and the speed μ. The
//! equations are the Galerkin residual −μa + m∘a + P_M(φ²) = 0 together with
//! the height condition φ(0) = Σ a_k = λμ/2. Newton steps use the exact
//! Jacobian and a dense LU factorization.

use std::f64::consts::PI;

use faer::prelude::*;
use faer::Mat;

use crate::error::{Error, Result};
use crate::kernel::SymbolTable;
use crate::spectral::{residual_coeffs, EvenPeriodicFunction, PeriodicGrid};

/// One even P-periodic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWave {
    pub period: f64,
    pub lambda: f64,
    pub mu: f64,
    pub profile: EvenPeriodicFunction,
    pub residual_norm: f64,
    /// Newton iterations taken by the solve that produced this wave.
    pub iterations: usize,
}

impl PeriodicWave {
    pub fn grid(&self) -> &PeriodicGrid {
        self.profile.grid()
    }

    pub fn n(&self) -> usize {
        self.grid().n()
    }

    pub fn crest(&self) -> f64 {
        self.profile.crest()
    }
}

/// Waves at a common period, ordered by increasing λ.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub period: f64,
    pub points: Vec<PeriodicWave>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Bound on the residual ∞-norm at the nodes and on the height defect.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest λ step before continuation gives up.
    pub step_floor: f64,
    /// Largest λ step taken during continuation.
    pub max_step: f64,
    /// Height of the first solve on a fresh branch.
    pub first_step: f64,
    /// Smallest admissible ratio of extreme pivots in the LU factorization.
    pub pivot_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 50,
            step_floor: 1e-4,
            max_step: 0.05,
            first_step: 0.01,
            pivot_ratio: 1e-14,
        }
    }
}

/// Nodes per period used for a given relative height, sized so that the
/// trailing cosine coefficients fall below 1e-14 at P = 2π.
pub fn default_nodes(lambda: f64) -> usize {
    if lambda <= 0.6 {
        512
    } else if lambda <= 0.8 {
        1024
    } else if lambda <= 0.9 {
        2048
    } else {
        4096
    }
}

/// m(2πk/P): the speed at which mode k of the linearization at 0 is neutral.
pub fn bifurcation_speed(period: f64, k: usize) -> Result<f64> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::domain(format!("period must be positive, got {period}")));
    }
    SymbolTable::default().eval(2.0 * PI * k as f64 / period)
}

/// Small-amplitude guess ε cos(2πx/P) with the bifurcation speed of mode 1.
pub fn initial_guess(grid: &PeriodicGrid, eps: f64) -> Result<(EvenPeriodicFunction, f64)> {
    if !(0.0..=0.05).contains(&eps) {
        return Err(Error::Precondition(format!("ε must lie in [0, 0.05], got {eps}")));
    }
    let mut coeffs = vec![0.0; grid.modes() + 1];
    coeffs[1] = eps;
    let mu = bifurcation_speed(grid.period(), 1)?;
    Ok((EvenPeriodicFunction::from_coeffs(grid, coeffs)?, mu))
}

fn residual_norm(grid: &PeriodicGrid, r: &[f64], height_defect: f64) -> f64 {
    grid.synthesis_half(r)
        .iter()
        .fold(height_defect.abs(), |m, v| m.max(v.abs()))
}

// Jacobian of the augmented system; see the module docs for the layout.
fn jacobian(grid: &PeriodicGrid, a: &[f64], mu: f64, lambda: f64) -> Mat<f64> {
    let m = a.len() - 1;
    let sym = grid.symbol();
    Mat::from_fn(m + 2, m + 2, |n, k| {
        if n == m + 1 {
            return if k == m + 1 { -0.5 * lambda } else { 1.0 };
        }
        if k == m + 1 {
            return -a[n];
        }
        // twice the product matrix: d/da_k of the truncated φ²
        let mut t = 0.0;
        if n >= k {
            t += a[n - k];
        }
        if n + k <= m {
            t += a[n + k];
        }
        if n > 0 && k >= n {
            t += a[k - n];
        }
        if n == k {
            t += sym[n] - mu;
        }
        t
    })
}

/// Newton iteration for the wave of relative height `lambda` on the grid of
/// `guess`.
pub fn newton_solve(
    guess: &EvenPeriodicFunction,
    mu0: f64,
    lambda: f64,
    config: &SolverConfig,
) -> Result<PeriodicWave> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain(format!("λ must lie in (0, 1], got {lambda}")));
    }
    if !(config.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {}", config.tol)));
    }
    let grid = guess.grid().clone();
    let m = grid.modes();
    let mut a = guess.coeffs().to_vec();
    let mut mu = mu0;
    let mut res = f64::INFINITY;
    for iter in 0..=config.max_iter {
        let r = residual_coeffs(&grid, &a, mu);
        let g = a.iter().sum::<f64>() - 0.5 * lambda * mu;
        res = residual_norm(&grid, &r, g);
        if !res.is_finite() {
            break;
        }
        if res <= config.tol {
            return Ok(PeriodicWave {
                period: grid.period(),
                lambda,
                mu,
                profile: EvenPeriodicFunction::from_coeffs_unchecked(&grid, a),
                residual_norm: res,
                iterations: iter,
            });
        }
        if iter == config.max_iter {
            break;
        }
        let j = jacobian(&grid, &a, mu, lambda);
        let lu = j.partial_piv_lu();
        let diag = lu.U().diagonal();
        let (lo, hi) = (0..m + 2).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            let d = diag[i].abs();
            (lo.min(d), hi.max(d))
        });
        if !(lo > config.pivot_ratio * hi) {
            return Err(Error::SingularJacobian {
                pivot_ratio: lo / hi,
            });
        }
        let rhs = Mat::from_fn(m + 2, 1, |i, _| if i <= m { -r[i] } else { -g });
        let d = lu.solve(&rhs);
        for (i, ai) in a.iter_mut().enumerate() {
            *ai += d[(i, 0)];
        }
        mu += d[(m + 1, 0)];
    }
    Err(Error::Divergence {
        iterations: config.max_iter,
        residual: res,
        last: Box::new(PeriodicWave {
            period: grid.period(),
            lambda,
            mu,
            profile: EvenPeriodicFunction::from_coeffs_unchecked(&grid, a),
            residual_norm: res,
            iterations: config.max_iter,
        }),
    })
}

/// A converged state used as a continuation anchor.
#[derive(Clone)]
struct Anchor {
    lambda: f64,
    coeffs: Vec<f64>,
    mu: f64,
}

impl Anchor {
    fn from_wave(w: &PeriodicWave) -> Self {
        Self {
            lambda: w.lambda,
            coeffs: w.profile.coeffs().to_vec(),
            mu: w.mu,
        }
    }
}

/// Marches the branch through increasing relative heights.
pub struct Continuation<'a> {
    grid: PeriodicGrid,
    config: &'a SolverConfig,
    last: Option<Anchor>,
    before: Option<Anchor>,
    step: f64,
}

impl<'a> Continuation<'a> {
    /// Starts from the small-amplitude guess on `grid`.
    pub fn new(grid: &PeriodicGrid, config: &'a SolverConfig) -> Self {
        Self {
            grid: grid.clone(),
            config,
            last: None,
            before: None,
            step: config.max_step,
        }
    }

    /// Starts from a converged wave.
    pub fn from_wave(wave: &PeriodicWave, config: &'a SolverConfig) -> Self {
        Self {
            grid: wave.grid().clone(),
            config,
            last: Some(Anchor::from_wave(wave)),
            before: None,
            step: config.max_step,
        }
    }

    fn predict(&self, lambda: f64) -> Result<(EvenPeriodicFunction, f64)> {
        match (&self.last, &self.before) {
            (Some(l), Some(b)) => {
                let s = (lambda - l.lambda) / (l.lambda - b.lambda);
                let coeffs = l
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(x, y)| x + s * (x - y))
                    .collect();
                Ok((
                    EvenPeriodicFunction::from_coeffs_unchecked(&self.grid, coeffs),
                    l.mu + s * (l.mu - b.mu),
                ))
            }
            (Some(l), None) => Ok((
                EvenPeriodicFunction::from_coeffs_unchecked(&self.grid, l.coeffs.clone()),
                l.mu,
            )),
            (None, _) => {
                let mu = bifurcation_speed(self.grid.period(), 1)?;
                initial_guess(&self.grid, (0.5 * lambda * mu).min(0.05))
            }
        }
    }

    fn accept(&mut self, wave: &PeriodicWave) {
        self.before = self.last.take();
        self.last = Some(Anchor::from_wave(wave));
    }

    /// Advances to `target`, bisecting the λ step on failure.
    pub fn advance_to(&mut self, target: f64) -> Result<PeriodicWave> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::domain(format!("λ must lie in (0, 1], got {target}")));
        }
        let start = self.last.as_ref().map_or(0.0, |l| l.lambda);
        if target <= start {
            return Err(Error::domain(format!(
                "λ targets must increase: {target} after {start}"
            )));
        }
        loop {
            let from = self.last.as_ref().map_or(0.0, |l| l.lambda);
            let step = if self.last.is_none() {
                self.step.min(self.config.first_step).min(target)
            } else {
                self.step.min(target - from)
            };
            let lambda = if target - (from + step) < 1e-12 { target } else { from + step };
            let (guess, mu) = self.predict(lambda)?;
            // a speed outside (0, 1] means Newton left the branch
            let solved = newton_solve(&guess, mu, lambda, self.config).and_then(|w| {
                if w.mu > 0.0 && w.mu <= 1.0 {
                    Ok(w)
                } else {
                    Err(Error::Divergence {
                        iterations: w.iterations,
                        residual: w.residual_norm,
                        last: Box::new(w),
                    })
                }
            });
            match solved {
                Ok(wave) => {
                    self.accept(&wave);
                    self.step = (2.0 * self.step).min(self.config.max_step);
                    if lambda == target {
                        return Ok(wave);
                    }
                }
                Err(Error::Divergence { .. }) | Err(Error::SingularJacobian { .. }) => {
                    self.step *= 0.5;
                    if self.step < self.config.step_floor {
                        return Err(Error::ContinuationStall {
                            target,
                            last_good: from,
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Solves at every λ in the increasing grid, warm-starting each solve from
/// the previous ones.
pub fn continue_in_lambda(
    grid: &PeriodicGrid,
    lambdas: &[f64],
    config: &SolverConfig,
) -> Result<Branch> {
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("λ grid must be strictly increasing"));
    }
    let mut cont = Continuation::new(grid, config);
    let points = lambdas
        .iter()
        .map(|&l| cont.advance_to(l))
        .collect::<Result<Vec<_>>>()?;
    Ok(Branch {
        period: grid.period(),
        points,
    })
}

/// Re-solves a wave on a finer grid of `n` nodes, starting from its
/// trigonometric interpolant.
pub fn refine(wave: &PeriodicWave, n: usize, config: &SolverConfig) -> Result<PeriodicWave> {
    if n <= wave.n() {
        return Err(Error::shape(format!(
            "refinement needs more than {} nodes, got {n}",
            wave.n()
        )));
    }
    let grid = PeriodicGrid::new(wave.period, n)?;
    let guess = wave.profile.resample(&grid)?;
    newton_solve(&guess, wave.mu, wave.lambda, config)
}

/// Settings for the near-extreme wave. The crest singularity needs a short
/// period so that N nodes resolve it.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspMode {
    pub period: f64,
    pub lambda: f64,
    /// Resolution used to climb the branch up to `switch_lambda`.
    pub coarse_nodes: usize,
    pub fine_nodes: usize,
    pub switch_lambda: f64,
    /// Heights visited between `switch_lambda` and `lambda`.
    pub ladder: Vec<f64>,
}

impl Default for CuspMode {
    fn default() -> Self {
        Self {
            period: 1.0,
            lambda: 0.999,
            coarse_nodes: 1024,
            fine_nodes: 4096,
            switch_lambda: 0.9,
            ladder: vec![0.95, 0.97, 0.98, 0.99, 0.995, 0.998],
        }
    }
}

/// Near-extreme wave at `mode.lambda`.
pub fn solve_cusp(mode: &CuspMode, config: &SolverConfig) -> Result<PeriodicWave> {
    if !(mode.switch_lambda < mode.lambda) {
        return Err(Error::Precondition(
            "cusp mode must switch resolution below the target height".into(),
        ));
    }
    let coarse = PeriodicGrid::new(mode.period, mode.coarse_nodes)?;
    let mut cont = Continuation::new(&coarse, config);
    let mut wave = cont.advance_to(mode.switch_lambda)?;
    if mode.fine_nodes > mode.coarse_nodes {
        wave = refine(&wave, mode.fine_nodes, config)?;
    }
    let mut cont = Continuation::from_wave(&wave, config);
    for &l in mode.ladder.iter().filter(|&&l| l > mode.switch_lambda && l < mode.lambda) {
        cont.advance_to(l)?;
    }
    cont.advance_to(mode.lambda)
}
