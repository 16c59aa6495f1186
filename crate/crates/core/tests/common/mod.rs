//! Reference computations that do not go through the library's kernel
//! splitting.

#![allow(dead_code)]

use std::f64::consts::PI;

use whitham_core::kernel::{PeriodizationMethod, PeriodizedKernel};
use whitham_core::quadrature::CompositeRule;
use whitham_core::spectral::EvenPeriodicFunction;

fn symbol(xi: f64) -> f64 {
    if xi == 0.0 {
        1.0
    } else {
        (xi.tanh() / xi).sqrt()
    }
}

/// K(x) = (1/π)∫₀^∞ m(ξ) cos(xξ) dξ.
///
/// The symbol is integrated directly up to Ξ = 30. Beyond Ξ, m(ξ) differs
/// from ξ^{-1/2} by O(e^{-2Ξ}), and
/// ∫_Ξ^∞ ξ^{-1/2} cos(xξ) dξ = x^{-1/2}(√(π/2) − 2∫₀^{√(xΞ)} cos(u²) du).
pub fn kernel_direct(x: f64) -> f64 {
    let x = x.abs();
    let cutoff = 30.0;
    let panels = ((x * cutoff / PI).ceil() as usize + 1) * 4;
    let head = CompositeRule::new(0.0, cutoff, panels, 16).integrate(|xi| symbol(xi) * (x * xi).cos());
    let z = (x * cutoff).sqrt();
    let fpanels = ((z * z / PI).ceil() as usize + 1) * 4;
    let fresnel = CompositeRule::new(0.0, z, fpanels, 16).integrate(|u| (u * u).cos());
    let tail = ((0.5 * PI).sqrt() - 2.0 * fresnel) / x.sqrt();
    (head + tail) / PI
}

/// Richardson-extrapolated midpoint sums for ∫_{|y|≤δ} K(y)|y|^{1/2} dy.
///
/// The integrand on (0, δ] is c + g(y)√y with g smooth, so the midpoint
/// error expands in h^{3/2}, h², h^{5/2}, h^{7/2}, h⁴, ...
pub fn weighted_integral_richardson(delta: f64) -> f64 {
    let levels = [200usize, 400, 800, 1600, 3200];
    let sums: Vec<f64> = levels
        .iter()
        .map(|&n| {
            let h = delta / n as f64;
            (0..n)
                .map(|i| {
                    let y = (i as f64 + 0.5) * h;
                    kernel_direct(y) * y.sqrt()
                })
                .sum::<f64>()
                * h
        })
        .collect();
    let exponents = [1.5, 2.0, 2.5, 3.5];
    let mut table = sums;
    for p in exponents {
        let r = 2f64.powf(p);
        table = table.windows(2).map(|w| (r * w[1] - w[0]) / (r - 1.0)).collect();
    }
    2.0 * table[table.len() - 1]
}

/// ∫_{−P/2}^{P/2} K_P(x − y) f(y) dy by folding at the singularity and
/// substituting s = u² on (0, P/2].
pub fn convolve_by_quadrature(pk: &PeriodizedKernel, f: &EvenPeriodicFunction, x: f64, panels: usize) -> f64 {
    let p = pk.period;
    let rule = CompositeRule::new(0.0, (0.5 * p).sqrt(), panels, 20);
    rule.integrate(|u| {
        let s = u * u;
        let k = pk.eval(s, PeriodizationMethod::Fourier).expect("off-lattice point");
        2.0 * u * k * (f.eval_at(x + s) + f.eval_at(x - s))
    })
}
