//! Even P-periodic functions as cosine series on a uniform grid.
//!
//! The full grid is x_j = −P/2 + jP/N, j = 0..N. An even function is stored
//! by its cosine coefficients a_0..a_M, M = N/2, so that
//! φ(x) = Σ_k a_k cos(2πkx/P). The nodes with x ≥ 0 are x = jP/N, j = 0..=M,
//! and values there form a DCT-I pair with the coefficients.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernel::SymbolTable;

/// Uniform grid of N nodes on one period, with cached transforms.
#[derive(Clone)]
pub struct PeriodicGrid {
    period: f64,
    n: usize,
    symbol: Arc<Vec<f64>>,
    fft: Arc<dyn Fft<f64>>,
    padded_fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("period", &self.period)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.period == other.period && self.n == other.n
    }
}

impl PeriodicGrid {
    pub fn new(period: f64, n: usize) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::domain(format!("period must be positive, got {period}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::shape(format!("node count must be even and at least 8, got {n}")));
        }
        let m = n / 2;
        let sym = SymbolTable::default();
        let symbol = (0..=m)
            .map(|k| sym.value(2.0 * PI * k as f64 / period))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * m);
        let padded_fft = planner.plan_fft_forward(2 * padded_half(m));
        Ok(Self {
            period,
            n,
            symbol: Arc::new(symbol),
            fft,
            padded_fft,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of nodes on a full period.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest cosine mode, N/2.
    pub fn modes(&self) -> usize {
        self.n / 2
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| -0.5 * self.period + j as f64 * h).collect()
    }

    /// Nodes with x ≥ 0: jP/N for j = 0..=M.
    pub fn half_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..=self.modes()).map(|j| j as f64 * h).collect()
    }

    /// m(2πk/P) for k = 0..=M.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Cosine coefficients from values at the half-grid nodes.
    pub(crate) fn analysis_half(&self, half: &[f64]) -> Vec<f64> {
        let m = self.modes();
        let mut a = dct1(&*self.fft, half);
        let scale = 1.0 / m as f64;
        a.iter_mut().for_each(|v| *v *= scale);
        a[0] *= 0.5;
        a[m] *= 0.5;
        a
    }

    /// Values at the half-grid nodes from cosine coefficients.
    pub(crate) fn synthesis_half(&self, coeffs: &[f64]) -> Vec<f64> {
        synthesis_with(&*self.fft, coeffs)
    }

    /// Coefficients of the product of two cosine series, truncated to modes
    /// 0..=M. The padded transform makes this exact.
    pub(crate) fn product(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let m = self.modes();
        let m2 = padded_half(m);
        let mut pa = vec![0.0; m2 + 1];
        let mut pb = vec![0.0; m2 + 1];
        pa[..=m].copy_from_slice(a);
        pb[..=m].copy_from_slice(b);
        let va = synthesis_with(&*self.padded_fft, &pa);
        let vb = synthesis_with(&*self.padded_fft, &pb);
        let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
        let mut c = dct1(&*self.padded_fft, &prod);
        let scale = 1.0 / m2 as f64;
        c.truncate(m + 1);
        c.iter_mut().for_each(|v| *v *= scale);
        c[0] *= 0.5;
        c
    }

    fn full_from_half(&self, half: &[f64]) -> Vec<f64> {
        let m = self.modes();
        (0..self.n).map(|j| half[j.abs_diff(m)]).collect()
    }

    fn check_len(&self, len: usize, expected: usize, what: &str) -> Result<()> {
        if len != expected {
            return Err(Error::shape(format!(
                "{what}: expected {expected} entries for N = {}, got {len}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Half-size of the padded grid used for quadratic products.
fn padded_half(m: usize) -> usize {
    (3 * m + 1).div_ceil(2)
}

// Y_k = Σ_j y_j cos(πjk/M) with end points weighted by 1/2 · 2, computed by an
// FFT of the even extension of length 2M.
fn dct1(fft: &dyn Fft<f64>, y: &[f64]) -> Vec<f64> {
    let m = y.len() - 1;
    debug_assert_eq!(fft.len(), 2 * m);
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(2 * m);
    buf.extend(y.iter().map(|&v| Complex::new(v, 0.0)));
    buf.extend(y[1..m].iter().rev().map(|&v| Complex::new(v, 0.0)));
    fft.process(&mut buf);
    buf.truncate(m + 1);
    buf.into_iter().map(|c| c.re).collect()
}

fn synthesis_with(fft: &dyn Fft<f64>, coeffs: &[f64]) -> Vec<f64> {
    let m = coeffs.len() - 1;
    let mut c = coeffs.to_vec();
    c[0] *= 2.0;
    c[m] *= 2.0;
    let mut v = dct1(fft, &c);
    v.iter_mut().for_each(|x| *x *= 0.5);
    v
}

/// Cosine coefficients a_0..a_M of the even part of nodal data on the full grid.
pub fn cosine_analysis(grid: &PeriodicGrid, values: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(values.len(), grid.n(), "nodal values")?;
    let m = grid.modes();
    let half: Vec<f64> = (0..=m)
        .map(|j| {
            if j == m {
                values[0]
            } else {
                0.5 * (values[m + j] + values[m - j])
            }
        })
        .collect();
    Ok(grid.analysis_half(&half))
}

/// Values on the full grid of the cosine series with coefficients a_0..a_M.
pub fn cosine_synthesis(grid: &PeriodicGrid, coeffs: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(coeffs.len(), grid.modes() + 1, "cosine coefficients")?;
    Ok(grid.full_from_half(&grid.synthesis_half(coeffs)))
}

/// An even periodic function: coefficients plus cached nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPeriodicFunction {
    grid: PeriodicGrid,
    coeffs: Vec<f64>,
    values: Vec<f64>,
}

impl EvenPeriodicFunction {
    pub fn from_coeffs(grid: &PeriodicGrid, coeffs: Vec<f64>) -> Result<Self> {
        let values = cosine_synthesis(grid, &coeffs)?;
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            values,
        })
    }

    pub fn from_values(grid: &PeriodicGrid, values: &[f64]) -> Result<Self> {
        let coeffs = cosine_analysis(grid, values)?;
        Self::from_coeffs(grid, coeffs)
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let half: Vec<f64> = grid.half_nodes().into_iter().map(f).collect();
        let coeffs = grid.analysis_half(&half);
        Self {
            grid: grid.clone(),
            values: grid.full_from_half(&half),
            coeffs,
        }
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        let mut coeffs = vec![0.0; grid.modes() + 1];
        coeffs[0] = c;
        Self {
            grid: grid.clone(),
            coeffs,
            values: vec![c; grid.n()],
        }
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub(crate) fn from_coeffs_unchecked(grid: &PeriodicGrid, coeffs: Vec<f64>) -> Self {
        let half = grid.synthesis_half(&coeffs);
        Self {
            grid: grid.clone(),
            values: grid.full_from_half(&half),
            coeffs,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Values at the full-grid nodes x_j = −P/2 + jP/N.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values at the nodes jP/N, j = 0..=M.
    pub fn half_values(&self) -> Vec<f64> {
        self.values[self.grid.modes()..]
            .iter()
            .copied()
            .chain(std::iter::once(self.values[0]))
            .collect()
    }

    /// φ(0) = Σ a_k.
    pub fn crest(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, x: f64) -> f64 {
        eval_cosine_series(&self.coeffs, self.grid.period, x)
    }

    /// φ(0) − φ(x) = Σ a_k · 2 sin²(πkx/P), without cancellation near 0.
    pub fn crest_drop(&self, x: f64) -> f64 {
        let w = PI * x / self.grid.period;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| {
                let s = (w * k as f64).sin();
                2.0 * a * s * s
            })
            .sum()
    }

    /// (Lφ)(x) at an arbitrary point.
    pub fn eval_l_at(&self, x: f64) -> f64 {
        let b: Vec<f64> = self
            .coeffs
            .iter()
            .zip(self.grid.symbol())
            .map(|(a, m)| a * m)
            .collect();
        eval_cosine_series(&b, self.grid.period, x)
    }

    /// The same trigonometric polynomial on another grid of the same period;
    /// modes beyond the new grid are dropped.
    pub fn resample(&self, grid: &PeriodicGrid) -> Result<Self> {
        if grid.period() != self.grid.period() {
            return Err(Error::shape("resampling requires equal periods"));
        }
        let mut coeffs = vec![0.0; grid.modes() + 1];
        let k = coeffs.len().min(self.coeffs.len());
        coeffs[..k].copy_from_slice(&self.coeffs[..k]);
        Ok(Self::from_coeffs_unchecked(grid, coeffs))
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::shape(format!(
                "grids differ: (P = {}, N = {}) vs (P = {}, N = {})",
                self.grid.period, self.grid.n, other.grid.period, other.grid.n
            )));
        }
        Ok(())
    }
}

/// Σ_k a_k cos(2πkx/P) by Clenshaw recurrence.
pub fn eval_cosine_series(coeffs: &[f64], period: f64, x: f64) -> f64 {
    let theta = 2.0 * PI * x / period;
    let c = theta.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &a in coeffs.iter().skip(1).rev() {
        let b0 = a + 2.0 * c * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + c * b1 - b2
}

/// Lf: mode k scaled by m(2πk/P).
pub fn apply_l(f: &EvenPeriodicFunction) -> EvenPeriodicFunction {
    let coeffs = f
        .coeffs
        .iter()
        .zip(f.grid.symbol())
        .map(|(a, m)| a * m)
        .collect();
    EvenPeriodicFunction::from_coeffs_unchecked(&f.grid, coeffs)
}

/// Coefficients of −μφ + Lφ + φ², with the square taken without aliasing.
pub(crate) fn residual_coeffs(grid: &PeriodicGrid, a: &[f64], mu: f64) -> Vec<f64> {
    let sq = grid.product(a, a);
    a.iter()
        .zip(grid.symbol())
        .zip(&sq)
        .map(|((a, m), q)| (m - mu) * a + q)
        .collect()
}

/// −μφ + Lφ + φ².
pub fn steady_residual(phi: &EvenPeriodicFunction, mu: f64) -> EvenPeriodicFunction {
    let r = residual_coeffs(&phi.grid, &phi.coeffs, mu);
    EvenPeriodicFunction::from_coeffs_unchecked(&phi.grid, r)
}

/// Derivative of [`steady_residual`] at (φ, μ) in direction (δφ, δμ):
/// (−μ + 2φ)δφ + Lδφ − δμ·φ.
pub fn jacobian_action(
    phi: &EvenPeriodicFunction,
    mu: f64,
    dphi: &EvenPeriodicFunction,
    dmu: f64,
) -> Result<EvenPeriodicFunction> {
    phi.same_grid(dphi)?;
    let grid = &phi.grid;
    let cross = grid.product(&phi.coeffs, &dphi.coeffs);
    let coeffs = dphi
        .coeffs
        .iter()
        .zip(grid.symbol())
        .zip(cross.iter().zip(&phi.coeffs))
        .map(|((d, m), (q, a))| (m - mu) * d + 2.0 * q - dmu * a)
        .collect();
    Ok(EvenPeriodicFunction::from_coeffs_unchecked(grid, coeffs))
}
