//! Solitary waves as limits of periodic waves of fixed relative height.
//!
//! At fixed λ the period is increased along a schedule, each solve warm
//! started from the previous profile. Once speeds and windowed profiles
//! settle, the limit (φ, ν) is shifted by the Galilean map
//! (φ, ν) ↦ (φ + 1 − ν, 2 − ν) to a positive wave with supercritical speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{newton_solve, Continuation, PeriodicWave, SolverConfig};
use crate::spectral::{EvenPeriodicFunction, PeriodicGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Bound on the last |Δμ| and on the last windowed sup difference.
    pub tol: f64,
    /// Node density; `None` picks 32 per unit length for λ ≤ 0.6 and 64 above.
    pub points_per_unit: Option<usize>,
    pub solver: SolverConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            points_per_unit: None,
            solver: SolverConfig::default(),
        }
    }
}

impl SweepConfig {
    /// Smallest power of two covering the requested density.
    pub fn nodes_for(&self, period: f64, lambda: f64) -> usize {
        let ppu = self
            .points_per_unit
            .unwrap_or(if lambda <= 0.6 { 32 } else { 64 });
        ((period * ppu as f64).ceil() as usize).next_power_of_two().max(8)
    }
}

/// History of a period sweep, kept with the resulting solitary wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub window: f64,
    pub tol: f64,
    pub periods: Vec<f64>,
    pub nodes: Vec<usize>,
    pub speeds: Vec<f64>,
    pub residuals: Vec<f64>,
    /// |μ_{i+1} − μ_i| for consecutive entries.
    pub speed_differences: Vec<f64>,
    /// sup over [−W, W] of |φ_{i+1} − φ_i|.
    pub profile_differences: Vec<f64>,
    pub converged: bool,
    /// Aitken extrapolation of the last three speeds; diagnostic only.
    pub extrapolated_speed: Option<f64>,
}

impl std::fmt::Display for SweepRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "λ = {}, periods {:?}, last |Δμ| = {:e}, last profile difference = {:e}, tol = {:e}",
            self.lambda,
            self.periods,
            self.speed_differences.last().copied().unwrap_or(f64::NAN),
            self.profile_differences.last().copied().unwrap_or(f64::NAN),
            self.tol
        )
    }
}

/// Converged sequence of periodic waves at one relative height.
#[derive(Debug, Clone)]
pub struct PeriodSweep {
    pub lambda: f64,
    pub window: f64,
    pub waves: Vec<PeriodicWave>,
    pub record: SweepRecord,
}

impl PeriodSweep {
    pub fn speed_history(&self) -> &[f64] {
        &self.record.speeds
    }
}

fn aitken(m: &[f64]) -> Option<f64> {
    let [a, b, c] = m[m.len().checked_sub(3)?..] else {
        return None;
    };
    let denom = (c - b) - (b - a);
    if denom.abs() < f64::EPSILON * c.abs() {
        return None;
    }
    Some(c - (c - b) * (c - b) / denom)
}

// Guess on a longer period: keep φ on |x| ≤ P/2 and continue it by the
// trough value.
fn reperiodize(prev: &PeriodicWave, grid: &PeriodicGrid) -> EvenPeriodicFunction {
    let half = 0.5 * prev.period;
    let trough = prev.profile.eval_at(half);
    EvenPeriodicFunction::from_fn(grid, |x| {
        if x <= half {
            prev.profile.eval_at(x)
        } else {
            trough
        }
    })
}

fn window_difference(a: &PeriodicWave, b: &PeriodicWave, window: f64) -> f64 {
    b.grid()
        .half_nodes()
        .into_iter()
        .take_while(|&x| x <= window)
        .map(|x| (a.profile.eval_at(x) - b.profile.eval_at(x)).abs())
        .fold(0.0, f64::max)
}

/// Solves at each period of the schedule and tests the last pair for
/// convergence.
pub fn period_sweep(
    lambda: f64,
    schedule: &[f64],
    window: f64,
    config: &SweepConfig,
) -> Result<PeriodSweep> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain(format!("λ must lie in (0, 1], got {lambda}")));
    }
    if !(window > 0.0) {
        return Err(Error::domain(format!("window must be positive, got {window}")));
    }
    if schedule.len() < 3 {
        return Err(Error::Precondition("a sweep needs at least three periods".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("period schedule must be increasing".into()));
    }
    if schedule[0] < 1.0_f64.max(2.0 * window) {
        return Err(Error::Precondition(format!(
            "smallest period {} must be at least max(1, 2W) = {}",
            schedule[0],
            1.0_f64.max(2.0 * window)
        )));
    }

    let mut waves: Vec<PeriodicWave> = Vec::with_capacity(schedule.len());
    for &period in schedule {
        let grid = PeriodicGrid::new(period, config.nodes_for(period, lambda))?;
        let warm = waves
            .last()
            .map(|prev| newton_solve(&reperiodize(prev, &grid), prev.mu, lambda, &config.solver));
        let wave = match warm {
            Some(Ok(w)) => w,
            _ => Continuation::new(&grid, &config.solver).advance_to(lambda)?,
        };
        waves.push(wave);
    }

    let speeds: Vec<f64> = waves.iter().map(|w| w.mu).collect();
    let speed_differences: Vec<f64> = speeds.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let profile_differences: Vec<f64> = waves
        .windows(2)
        .map(|p| window_difference(&p[0], &p[1], window))
        .collect();
    let converged = speed_differences.last().is_some_and(|&d| d < config.tol)
        && profile_differences.last().is_some_and(|&d| d < config.tol);
    let record = SweepRecord {
        lambda,
        window,
        tol: config.tol,
        periods: schedule.to_vec(),
        nodes: waves.iter().map(|w| w.n()).collect(),
        residuals: waves.iter().map(|w| w.residual_norm).collect(),
        extrapolated_speed: aitken(&speeds),
        speeds,
        speed_differences,
        profile_differences,
        converged,
    };
    if !converged {
        return Err(Error::SweepNotConverged(Box::new(record)));
    }
    Ok(PeriodSweep {
        lambda,
        window,
        waves,
        record,
    })
}

/// (φ + 1 − ν, 2 − ν).
pub fn galilean_transform(profile: &EvenPeriodicFunction, nu: f64) -> (EvenPeriodicFunction, f64) {
    let mut coeffs = profile.coeffs().to_vec();
    coeffs[0] += 1.0 - nu;
    (
        EvenPeriodicFunction::from_coeffs_unchecked(profile.grid(), coeffs),
        2.0 - nu,
    )
}

/// λ = (2 − (2 − α)μ)/(2 − μ).
pub fn lambda_from_alpha(alpha: f64, mu: f64) -> Result<f64> {
    if mu == 2.0 {
        return Err(Error::Singularity("the height map is undefined at μ = 2".into()));
    }
    Ok((2.0 - (2.0 - alpha) * mu) / (2.0 - mu))
}

/// α = (2(μ − 1) + λ(2 − μ))/μ, inverse of [`lambda_from_alpha`].
pub fn alpha_from_lambda(lambda: f64, mu: f64) -> Result<f64> {
    if mu == 2.0 {
        return Err(Error::Singularity("the height map is undefined at μ = 2".into()));
    }
    if mu == 0.0 {
        return Err(Error::Singularity("relative height is undefined at μ = 0".into()));
    }
    Ok((2.0 * (mu - 1.0) + lambda * (2.0 - mu)) / mu)
}

/// Log-linear fit φ ≈ A e^{−η|x|}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub eta: f64,
    pub log_amplitude: f64,
    pub r_squared: f64,
    /// Set when the coefficient of determination is below 0.99.
    pub poor_fit: bool,
}

/// Least-squares slope of −log φ against |x| over samples with
/// |x| ∈ [lo, hi].
pub fn fit_decay_rate(x: &[f64], phi: &[f64], tail: (f64, f64)) -> Result<DecayFit> {
    if x.len() != phi.len() {
        return Err(Error::shape("decay fit needs one value per abscissa"));
    }
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(phi)
        .filter(|(x, _)| (tail.0..=tail.1).contains(&x.abs()))
        .map(|(x, p)| (x.abs(), *p))
        .collect();
    if pts.len() < 3 {
        return Err(Error::domain(format!(
            "decay fit needs at least 3 samples in the tail window, got {}",
            pts.len()
        )));
    }
    if let Some((x, p)) = pts.iter().find(|(_, p)| !(*p > 0.0)) {
        return Err(Error::domain(format!("non-positive tail sample {p} at x = {x}")));
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, p)| (a + x / n, b + p.ln() / n));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(sxx, sxy), (x, p)| {
        let dx = x - mx;
        (sxx + dx * dx, sxy + dx * (p.ln() - my))
    });
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (ss_res, ss_tot) = pts.iter().fold((0.0, 0.0), |(r, t), (x, p)| {
        let y = p.ln();
        let e = y - (intercept + slope * x);
        (r + e * e, t + (y - my) * (y - my))
    });
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit {
        eta: -slope,
        log_amplitude: intercept,
        r_squared,
        poor_fit: r_squared < 0.99,
    })
}

/// Positive solitary wave obtained from a converged sweep.
#[derive(Debug, Clone)]
pub struct SolitaryWave {
    pub lambda: f64,
    /// Speed after the Galilean shift, 2 − ν.
    pub mu: f64,
    /// Limit speed of the periodic waves.
    pub nu: f64,
    /// φ(0)/(μ/2).
    pub alpha: f64,
    pub window: f64,
    /// Final-grid nodes in [−W, W] and the shifted profile there.
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub decay: Option<DecayFit>,
    /// Shifted profile on the last period of the sweep.
    pub profile: EvenPeriodicFunction,
    pub sweep: SweepRecord,
}

impl SolitaryWave {
    pub fn eta(&self) -> Option<f64> {
        self.decay.map(|d| d.eta)
    }

    pub fn crest(&self) -> f64 {
        self.profile.crest()
    }

    /// μ − 1 + λ(1 − μ/2).
    pub fn crest_bound(&self) -> f64 {
        self.mu - 1.0 + self.lambda * (1.0 - 0.5 * self.mu)
    }
}

fn fail(msg: String) -> Error {
    Error::Construction(msg)
}

/// Applies the Galilean shift to the last wave of the sweep, samples it on
/// the window, fits the decay rate, and checks the expected bounds.
pub fn extract_solitary(sweep: &PeriodSweep) -> Result<SolitaryWave> {
    if !sweep.record.converged {
        return Err(Error::Precondition("sweep has not converged".into()));
    }
    let last = sweep
        .waves
        .last()
        .ok_or_else(|| Error::Precondition("empty sweep".into()))?;
    let nu = last.mu;
    let (profile, mu) = galilean_transform(&last.profile, nu);
    let w = sweep.window;
    let (x, phi): (Vec<f64>, Vec<f64>) = profile
        .grid()
        .nodes()
        .into_iter()
        .zip(profile.values().iter().copied())
        .filter(|(x, _)| x.abs() <= w)
        .unzip();
    let crest = profile.crest();
    let alpha = crest / (0.5 * mu);
    let lambda = sweep.lambda;
    let wave_decay = fit_decay_rate(&x, &phi, (0.5 * w, w));

    if !(mu > 1.0 && mu < 2.0) {
        return Err(fail(format!("speed {mu} outside (1, 2)")));
    }
    let bound = mu - 1.0 + lambda * (1.0 - 0.5 * mu);
    if (crest - bound).abs() > 1e-10 {
        return Err(fail(format!("crest {crest} differs from μ − 1 + λ(1 − μ/2) = {bound}")));
    }
    if let Some(p) = phi.iter().find(|&&p| !(p > 0.0) || p > bound + 1e-10) {
        return Err(fail(format!("sample {p} outside (0, {bound}]")));
    }
    let mid = x.iter().position(|&v| v == 0.0).ok_or_else(|| fail("window misses x = 0".into()))?;
    for i in 1..=mid.min(phi.len() - 1 - mid) {
        if phi[mid + i] != phi[mid - i] {
            return Err(fail(format!("profile not even at x = {}", x[mid + i])));
        }
    }
    if let Some(i) = (mid + 1..phi.len()).find(|&i| phi[i] >= phi[i - 1]) {
        return Err(fail(format!("profile not decreasing at x = {}", x[i])));
    }
    let lam_back = lambda_from_alpha(alpha, mu)?;
    if (lam_back - lambda).abs() > 1e-10 {
        return Err(fail(format!("height map gives λ = {lam_back}, expected {lambda}")));
    }
    let decay = wave_decay.map_err(|e| fail(format!("decay fit failed: {e}")))?;
    if !(decay.eta > 0.0) {
        return Err(fail(format!("fitted decay rate {} is not positive", decay.eta)));
    }

    Ok(SolitaryWave {
        lambda,
        mu,
        nu,
        alpha,
        window: w,
        x,
        phi,
        decay: Some(decay),
        profile,
        sweep: sweep.record.clone(),
    })
}
