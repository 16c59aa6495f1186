//! The Whitham symbol m(ξ) = √(tanh ξ / ξ), its convolution kernel K, and the
//! P-periodic kernel K_P.
//!
//! K is split as K(x) = 1/√(2π|x|) + K_reg(x). The regular part is the inverse
//! cosine transform of m(ξ) − |ξ|^{-1/2}, which is integrable at the origin
//! and exponentially small beyond `tail_cutoff`.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveRule};
use crate::special::hurwitz_zeta;

/// Evaluation of m(ξ), with a Taylor expansion in ξ² near the removable
/// singularity at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolTable {
    pub cutoff: f64,
    /// Coefficients of 1, ξ², ξ⁴, ... in the expansion of m at 0.
    pub taylor_coeffs: Vec<f64>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self {
            cutoff: 1e-2,
            taylor_coeffs: vec![
                1.0,
                -1.0 / 6.0,
                19.0 / 360.0,
                -55.0 / 3024.0,
                11813.0 / 1_814_400.0,
            ],
        }
    }
}

impl SymbolTable {
    /// m(ξ) for finite ξ.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() {
            return Err(Error::domain(format!("symbol argument {xi} is not finite")));
        }
        Ok(self.value(xi))
    }

    /// Unchecked m(ξ); propagates NaN.
    #[inline]
    pub fn value(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a < self.cutoff {
            let z = a * a;
            self.taylor_coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
        } else {
            (a.tanh() / a).sqrt()
        }
    }

    /// m(ξ) − |ξ|^{-1/2} for ξ ≠ 0, free of cancellation for large |ξ|.
    pub fn remainder(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a < 1.0 {
            return self.value(a) - a.sqrt().recip();
        }
        let e = (-2.0 * a).exp();
        let t = a.tanh();
        // tanh a − 1 = −2e^{−2a}/(1 + e^{−2a})
        let tm1 = -2.0 * e / (1.0 + e);
        tm1 / (a.sqrt() * (t.sqrt() + 1.0))
    }
}

/// Pointwise evaluation of K and its integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEvaluator {
    pub quadrature_tol: f64,
    /// Upper limit of the frequency integral defining K_reg.
    pub tail_cutoff: f64,
    /// Decay rate in the tail bound |K(x)| ≤ C e^{−s₀|x|}, |x| ≥ 1/2.
    pub s0: f64,
    /// The constant C of that bound.
    pub tail_constant: f64,
    pub symbol: SymbolTable,
}

impl Default for KernelEvaluator {
    fn default() -> Self {
        Self {
            quadrature_tol: 1e-13,
            tail_cutoff: 20.0,
            s0: 1.0,
            tail_constant: 1.0,
            symbol: SymbolTable::default(),
        }
    }
}

fn singular_part(x: f64) -> f64 {
    (2.0 * PI * x.abs()).sqrt().recip()
}

impl KernelEvaluator {
    fn rule(&self, panels: usize) -> AdaptiveRule {
        AdaptiveRule {
            abs_tol: self.quadrature_tol,
            rel_tol: self.quadrature_tol,
            initial_panels: panels,
            max_segments: 50_000,
        }
    }

    // (1/π) ∫₀^Ξ (m(ξ) − ξ^{-1/2}) w(ξ) dξ for an oscillatory weight with
    // frequency `freq`; the piece on [0, 1] is taken in s = √ξ.
    fn regular_transform<W: Fn(f64) -> f64>(&self, freq: f64, weight: W) -> Result<f64> {
        let sym = &self.symbol;
        let near = |s: f64| {
            let xi = s * s;
            (2.0 * s * sym.value(xi) - 2.0) * weight(xi)
        };
        let far = |xi: f64| sym.remainder(xi) * weight(xi);
        let phase_panels = |len: f64| (freq * len / PI).ceil() as usize + 1;
        let (i0, _) = integrate_adaptive(near, 0.0, 1.0, self.rule(phase_panels(1.0)))?;
        let xi_max = self.tail_cutoff.max(1.0);
        let (i1, _) = integrate_adaptive(far, 1.0, xi_max, self.rule(phase_panels(xi_max - 1.0)))?;
        Ok((i0 + i1) / PI)
    }

    /// K_reg(x) = K(x) − 1/√(2π|x|); finite at x = 0.
    pub fn regular_part(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("kernel argument {x} is not finite")));
        }
        let x = x.abs();
        self.regular_transform(x, |xi| (x * xi).cos())
    }

    /// K(x) for x ≠ 0.
    pub fn kernel_point(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::Singularity("K is unbounded at x = 0".into()));
        }
        Ok(singular_part(x) + self.regular_part(x)?)
    }

    /// ∫_{−R}^{R} K(x) dx.
    pub fn kernel_mass(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("mass radius must be positive, got {r}")));
        }
        // ∫₀^R cos(xξ) dx = sin(Rξ)/ξ, integrated against m − ξ^{-1/2}
        let sinc_weight = |xi: f64| {
            let z = r * xi;
            if z < 1e-4 {
                r * (1.0 - z * z / 6.0)
            } else {
                z.sin() / xi
            }
        };
        let reg = self.regular_transform(r, sinc_weight)?;
        Ok(2.0 * (2.0 * r / PI).sqrt() + 2.0 * reg)
    }

    /// ∫_{|y|≤δ} K(y)|y|^{1/2} dy.
    pub fn kernel_weighted_integral(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::domain(format!("δ must be positive, got {delta}")));
        }
        // y = u²: ∫₀^δ K_reg(y) √y dy = ∫₀^{√δ} 2u² K_reg(u²) du
        let failure = RefCell::new(None);
        let f = |u: f64| match self.regular_part(u * u) {
            Ok(v) => 2.0 * u * u * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let rule = AdaptiveRule {
            abs_tol: self.quadrature_tol * 10.0,
            rel_tol: 0.0,
            initial_panels: 2,
            max_segments: 2_000,
        };
        let (reg, _) = integrate_adaptive(f, 0.0, delta.sqrt(), rule)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(2.0 * delta / (2.0 * PI).sqrt() + 2.0 * reg)
    }
}

/// Representation used to evaluate K_P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodizationMethod {
    /// Lattice sum Σ_{|n| ≤ n_terms} K(x + nP).
    Spatial,
    /// Fourier series with the |ξ|^{-1/2} part summed in closed form.
    Fourier,
}

/// K_P(x) = Σ_n K(x + nP).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodizedKernel {
    pub period: f64,
    pub n_terms_spatial: usize,
    pub n_modes_fourier: usize,
    pub evaluator: KernelEvaluator,
}

impl PeriodizedKernel {
    /// Truncation of the lattice sum at 1e-12 by the exponential tail bound,
    /// and of the Fourier series at the evaluator's tail cutoff.
    pub fn new(evaluator: KernelEvaluator, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::domain(format!("period must be positive, got {period}")));
        }
        let s0p = evaluator.s0 * period;
        let bound = |n: usize| {
            2.0 * evaluator.tail_constant * (-s0p * (n as f64 - 0.5)).exp() / (1.0 - (-s0p).exp())
        };
        let mut n_terms = 1;
        while bound(n_terms) >= 1e-12 {
            n_terms += 1;
        }
        let n_modes = (evaluator.tail_cutoff * period / (2.0 * PI)).ceil().max(1.0) as usize;
        Ok(Self {
            period,
            n_terms_spatial: n_terms,
            n_modes_fourier: n_modes,
            evaluator,
        })
    }

    /// Reduce x to t = frac(x/P) ∈ (0, 1); errors on the lattice PZ.
    fn phase(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("kernel argument {x} is not finite")));
        }
        let t = (x / self.period).rem_euclid(1.0);
        if t == 0.0 || t == 1.0 {
            return Err(Error::Singularity(format!(
                "K_P is unbounded at x = {x}, a multiple of P = {}",
                self.period
            )));
        }
        Ok(t)
    }

    pub fn eval(&self, x: f64, method: PeriodizationMethod) -> Result<f64> {
        let t = self.phase(x)?;
        match method {
            PeriodizationMethod::Spatial => self.eval_spatial(t),
            PeriodizationMethod::Fourier => Ok(self.eval_fourier(t)),
        }
    }

    fn eval_spatial(&self, t: f64) -> Result<f64> {
        let p = self.period;
        // representative in [−P/2, P/2)
        let x0 = if t < 0.5 { t * p } else { (t - 1.0) * p };
        let n = self.n_terms_spatial as i64;
        // smallest terms first
        let mut sum = 0.0;
        for k in (1..=n).rev() {
            let kf = k as f64 * p;
            sum += self.evaluator.kernel_point(x0 + kf)? + self.evaluator.kernel_point(x0 - kf)?;
        }
        Ok(sum + self.evaluator.kernel_point(x0)?)
    }

    fn eval_fourier(&self, t: f64) -> f64 {
        let p = self.period;
        let singular = (hurwitz_zeta(0.5, t) + hurwitz_zeta(0.5, 1.0 - t)) / (2.0 * PI * p).sqrt();
        let sym = &self.evaluator.symbol;
        let mut series = 0.0;
        for n in (1..=self.n_modes_fourier).rev() {
            let nf = n as f64;
            series += sym.remainder(2.0 * PI * nf / p) * (2.0 * PI * nf * t).cos();
        }
        singular + (1.0 + 2.0 * series) / p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_at_origin_and_one() {
        let s = SymbolTable::default();
        assert_eq!(s.eval(0.0).unwrap(), 1.0);
        assert!((s.eval(1.0).unwrap() - 0.872_693_620_897_829_7).abs() < 1e-15);
        assert_eq!(s.eval(2.0).unwrap(), s.eval(-2.0).unwrap());
        assert!(s.eval(f64::NAN).is_err());
        assert!(s.eval(f64::INFINITY).is_err());
    }

    #[test]
    fn taylor_branch_meets_closed_form() {
        let s = SymbolTable::default();
        let c = s.cutoff;
        let below = s.value(c * (1.0 - 1e-12));
        let closed = ((c.tanh()) / c).sqrt();
        assert!((below - closed).abs() < 1e-14);
    }

    #[test]
    fn remainder_is_consistent() {
        let s = SymbolTable::default();
        for xi in [0.3, 1.0, 2.5, 7.0] {
            let direct = s.value(xi) - xi.sqrt().recip();
            assert!((s.remainder(xi) - direct).abs() < 1e-15, "{xi}");
        }
    }

    #[test]
    fn kernel_rejects_origin() {
        let k = KernelEvaluator::default();
        assert!(matches!(k.kernel_point(0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn kernel_is_even() {
        let k = KernelEvaluator::default();
        let d = k.kernel_point(0.7).unwrap() - k.kernel_point(-0.7).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn mass_limits() {
        let k = KernelEvaluator::default();
        let small = k.kernel_mass(1e-10).unwrap();
        assert!(small > 0.0 && small < 1e-4);
        let one = k.kernel_mass(1.0).unwrap();
        assert!(one > 0.0 && one < 1.0);
        assert!(k.kernel_mass(0.0).is_err());
    }

    #[test]
    fn periodized_kernel_rejects_lattice() {
        let pk = PeriodizedKernel::new(KernelEvaluator::default(), 2.0).unwrap();
        for m in [PeriodizationMethod::Spatial, PeriodizationMethod::Fourier] {
            assert!(matches!(pk.eval(4.0, m), Err(Error::Singularity(_))));
        }
    }

    #[test]
    fn periodized_kernel_is_periodic_and_even() {
        let pk = PeriodizedKernel::new(KernelEvaluator::default(), 2.0 * PI).unwrap();
        let a = pk.eval(0.9, PeriodizationMethod::Fourier).unwrap();
        let b = pk.eval(0.9 + 2.0 * PI, PeriodizationMethod::Fourier).unwrap();
        let c = pk.eval(-0.9, PeriodizationMethod::Fourier).unwrap();
        assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
    }
}
