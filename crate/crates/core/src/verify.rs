//! Checks of the proved bounds and identities on computed waves.
//!
//! Each check records whether it passed, a signed margin (positive means
//! slack), the tolerance used, and a short reference naming the statement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelEvaluator;
use crate::solitary::{lambda_from_alpha, SolitaryWave};
use crate::solver::PeriodicWave;
use crate::spectral::{steady_residual, EvenPeriodicFunction, PeriodicGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub tolerance: f64,
    pub reference: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl Check {
    fn new(name: &str, reference: &str, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: margin >= -tolerance,
            margin,
            tolerance,
            reference: reference.into(),
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Plain-text table, one check per line.
    pub fn table(&self) -> String {
        let mut out = format!("{}\n", self.subject);
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<4} {:<24} margin {:>12.4e}  tol {:>8.1e}  {}\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.margin,
                c.tolerance,
                c.reference
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// Slack allowed in pointwise bounds.
    pub bound_tol: f64,
    /// Relative gap allowed in the L² identity.
    pub l2_tol: f64,
    /// Allowed defect in the crest identity and the height map.
    pub identity_tol: f64,
    /// δ in the crest term of the speed bound.
    pub speed_delta: f64,
    /// Candidate δ for the cusp estimate.
    pub delta_grid: Vec<f64>,
    /// |x| range of the crest exponent fit.
    pub holder_range: (f64, f64),
    pub kernel: KernelEvaluator,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            bound_tol: 1e-10,
            l2_tol: 1e-4,
            identity_tol: 1e-10,
            speed_delta: 0.05,
            delta_grid: vec![1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3],
            holder_range: (1e-4, 1e-1),
            kernel: KernelEvaluator::default(),
        }
    }
}

/// μ − 1 ≤ φ ≤ φ(0) = λμ/2, evenness, monotonicity on (−P/2, 0), 0 < μ ≤ 1.
pub fn check_periodic_bounds(wave: &PeriodicWave, tol: f64) -> Vec<Check> {
    const REF: &str = "uniform bounds for periodic waves";
    let v = wave.profile.values();
    let n = v.len();
    let m = n / 2;
    let mu = wave.mu;
    let top = 0.5 * wave.lambda * mu;

    let lower = v.iter().map(|p| p - (mu - 1.0)).fold(f64::INFINITY, f64::min);
    let upper = v.iter().map(|p| top - p).fold(f64::INFINITY, f64::min);
    let crest_defect = (v[m] - top).abs();
    let even = (1..n)
        .map(|j| (v[j] - v[n - j]).abs())
        .fold(0.0, f64::max);
    // nodes 0..=m run from −P/2 to the crest
    let mono = (1..=m).map(|j| v[j] - v[j - 1]).fold(f64::INFINITY, f64::min);

    vec![
        Check::new("lower_bound", REF, lower, tol).with("min_phi", lower + mu - 1.0),
        Check::new("upper_bound", REF, upper, tol).with("max_phi", top - upper),
        Check::new("crest_height", REF, 1e-12 * mu.max(1.0) - crest_defect, 0.0)
            .with("defect", crest_defect),
        Check::new("evenness", REF, -even, tol),
        Check::new("monotone", REF, mono, tol),
        Check {
            passed: mu > 0.0 && mu <= 1.0,
            ..Check::new("speed_window", "subcritical speed 0 < μ ≤ 1", (1.0 - mu).min(mu), 0.0)
        },
    ]
}

fn trapezoid(h: f64, f: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = f.collect();
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// (μ − 1)∫φ = ∫φ² with trapezoid sums on the window and an exponential
/// tail beyond it.
pub fn check_l2_identity(wave: &SolitaryWave, tol: f64) -> Result<Check> {
    const REF: &str = "integrated equation (μ − 1)∫φ = ∫φ²";
    if wave.phi.iter().all(|&p| p == 0.0) {
        return Ok(Check::new("l2_identity", REF, tol, tol).with("relative_gap", 0.0));
    }
    let decay = wave
        .decay
        .ok_or_else(|| Error::Precondition("L² identity needs a fitted decay rate".into()))?;
    if wave.x.len() < 2 {
        return Err(Error::Precondition("L² identity needs window samples".into()));
    }
    let h = wave.x[1] - wave.x[0];
    let eta = decay.eta;
    let ends = [wave.phi[0], wave.phi[wave.phi.len() - 1]];
    let i1 = trapezoid(h, wave.phi.iter().copied()) + ends.iter().map(|p| p / eta).sum::<f64>();
    let i2 = trapezoid(h, wave.phi.iter().map(|p| p * p))
        + ends.iter().map(|p| p * p / (2.0 * eta)).sum::<f64>();
    let lhs = (wave.mu - 1.0) * i1;
    let gap = (lhs - i2).abs() / i2.abs();
    Ok(Check::new("l2_identity", REF, tol - gap, 0.0)
        .with("relative_gap", gap)
        .with("lhs", lhs)
        .with("rhs", i2))
}

/// μ < 2/(2 − α), plus the crest term ((1 − α)/(2 − α) − δ)∫_{|y|≤δ}K|y|^{1/2}.
pub fn speed_bound(alpha: f64, mu: f64, delta: f64, kernel: &KernelEvaluator) -> Result<Check> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("α must lie in (0, 1], got {alpha}")));
    }
    let bound = 2.0 / (2.0 - alpha);
    let margin = bound - mu;
    let weighted = kernel.kernel_weighted_integral(delta)?;
    let crest_term = ((1.0 - alpha) / (2.0 - alpha) - delta) * weighted;
    Ok(Check {
        passed: margin > 0.0,
        ..Check::new("speed_bound", "μ < 2/(2 − α)", margin, 0.0)
            .with("bound", bound)
            .with("delta", delta)
            .with("crest_term", crest_term)
    })
}

pub fn check_speed_bound(wave: &SolitaryWave, config: &VerifyConfig) -> Result<Check> {
    speed_bound(wave.alpha, wave.mu, config.speed_delta, &config.kernel)
}

/// inf over 0 < x ≤ δ of (μ/2 − φ(x))/√x, sampled on a log grid and on the
/// grid nodes.
fn cusp_ratio(profile: &EvenPeriodicFunction, mu: f64, delta: f64) -> f64 {
    let gap0 = 0.5 * mu - profile.crest();
    let ratio = |x: f64| (gap0 + profile.crest_drop(x)) / x.sqrt();
    let h = profile.grid().spacing();
    let lo = (delta * 1e-6).ln();
    let hi = delta.ln();
    let log_pts = (0..=400).map(|i| (lo + (hi - lo) * i as f64 / 400.0).exp());
    let nodes = (1..).map(|j| j as f64 * h).take_while(|&x| x <= delta);
    log_pts.chain(nodes).map(ratio).fold(f64::INFINITY, f64::min)
}

/// Searches `delta_grid` for δ with μ/2 − φ(x) ≥ δ|x|^{1/2} on |x| ≤ δ and
/// reports the largest such δ.
pub fn check_cusp_estimate(profile: &EvenPeriodicFunction, mu: f64, delta_grid: &[f64]) -> Check {
    const REF: &str = "μ/2 − φ(x) ≥ δ|x|^{1/2} near the crest";
    let mut best: Option<(f64, f64)> = None;
    let mut closest = f64::NEG_INFINITY;
    for &d in delta_grid.iter().filter(|&&d| d > 0.0 && d <= 0.5 * profile.grid().period()) {
        let margin = cusp_ratio(profile, mu, d) - d;
        closest = closest.max(margin);
        if margin > 0.0 && best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, margin));
        }
    }
    match best {
        Some((d, margin)) => Check::new("cusp_estimate", REF, margin, 0.0).with("delta", d),
        None => Check {
            passed: false,
            ..Check::new("cusp_estimate", REF, closest.max(-1e300), 0.0)
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub r_squared: f64,
}

fn log_fit(x: &[f64], d: &[f64]) -> Result<HolderFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(d)
        .filter(|(x, d)| **x > 0.0 && **d > 0.0)
        .map(|(x, d)| (x.ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Resolution("too few positive crest samples".into()));
    }
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if hi - lo < 2.0 * std::f64::consts::LN_10 - 1e-9 {
        return Err(Error::Resolution(format!(
            "crest samples span {:.2} decades, need 2",
            (hi - lo) / std::f64::consts::LN_10
        )));
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxx, sxy, syy) = pts.iter().fold((0.0, 0.0, 0.0), |(a, b, c), p| {
        let (dx, dy) = (p.0 - mx, p.1 - my);
        (a + dx * dx, b + dx * dy, c + dy * dy)
    });
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(HolderFit {
        exponent: slope,
        r_squared,
    })
}

/// Slope of log(φ(0) − φ(x)) against log|x| from samples that include x = 0.
pub fn holder_exponent_at_crest(x: &[f64], phi: &[f64]) -> Result<HolderFit> {
    if x.len() != phi.len() {
        return Err(Error::shape("one value per abscissa is required"));
    }
    let i0 = x
        .iter()
        .position(|&v| v == 0.0)
        .ok_or_else(|| Error::Resolution("crest samples must include x = 0".into()))?;
    let top = phi[i0];
    let (ax, d): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(phi)
        .filter(|(x, _)| **x != 0.0)
        .map(|(x, p)| (x.abs(), top - p))
        .unzip();
    log_fit(&ax, &d)
}

/// Crest exponent from the trigonometric interpolant, with `count`
/// log-spaced points in `range`.
pub fn crest_holder_fit(
    profile: &EvenPeriodicFunction,
    range: (f64, f64),
    count: usize,
) -> Result<HolderFit> {
    let (lo, hi) = (range.0.ln(), range.1.ln());
    let x: Vec<f64> = (0..count)
        .map(|i| (lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64).exp())
        .collect();
    let d: Vec<f64> = x.iter().map(|&x| profile.crest_drop(x)).collect();
    log_fit(&x, &d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchingCase {
    /// ψ = φ₂ − φ₁ ≥ 0 on the window.
    Ordered,
    /// ψ takes negative values; its minimum is where c(x) < 1 is expected.
    Crossing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchingReport {
    pub case: TouchingCase,
    pub sup_difference: f64,
    pub x_min: f64,
    pub psi_min: f64,
    /// μ₁ − φ₁(x_min) − φ₂(x_min).
    pub c_at_min: f64,
    pub check: Check,
}

/// μ₁ − φ₁(x) − φ₂(x).
pub fn touching_coefficient(mu1: f64, phi1: f64, phi2: f64) -> f64 {
    mu1 - phi1 - phi2
}

/// Classifies ψ = φ₂ − φ₁ on the common window, ordering the waves so that
/// μ₁ ≥ μ₂.
pub fn check_touching(a: &SolitaryWave, b: &SolitaryWave, tol: f64) -> Result<TouchingReport> {
    let (w1, w2) = if a.mu >= b.mu { (a, b) } else { (b, a) };
    let window = w1.window.min(w2.window);
    let h = w1.profile.grid().spacing().min(w2.profile.grid().spacing());
    if !(window > 0.0 && h > 0.0) || window > 0.5 * w1.profile.grid().period().min(w2.profile.grid().period()) {
        return Err(Error::shape("waves have no compatible common window"));
    }
    let count = (window / h).floor() as usize;
    let xs: Vec<f64> = (0..=count).map(|j| j as f64 * h).collect();
    let (mut sup, mut x_min, mut psi_min) = (0.0f64, 0.0, f64::INFINITY);
    for &x in &xs {
        let psi = w2.profile.eval_at(x) - w1.profile.eval_at(x);
        sup = sup.max(psi.abs());
        if psi < psi_min {
            psi_min = psi;
            x_min = x;
        }
    }
    let c = touching_coefficient(w1.mu, w1.profile.eval_at(x_min), w2.profile.eval_at(x_min));
    const REF: &str = "touching dichotomy";
    let (case, check) = if psi_min >= -tol {
        (
            TouchingCase::Ordered,
            Check::new("touching", REF, 0.0, tol).with("sup_difference", sup),
        )
    } else {
        (
            TouchingCase::Crossing,
            Check {
                passed: c < 1.0,
                ..Check::new("touching", REF, 1.0 - c, 0.0).with("c_at_min", c)
            },
        )
    };
    Ok(TouchingReport {
        case,
        sup_difference: sup,
        x_min,
        psi_min,
        c_at_min: c,
        check,
    })
}

/// Constant states: φ ≡ 0 and φ ≡ μ − 1 solve the equation, other constants
/// leave the residual c(c − (μ − 1)).
pub fn check_constant_solutions(mu_grid: &[f64]) -> Result<Vec<Check>> {
    const REF: &str = "constant solutions are 0 and μ − 1";
    let grid = PeriodicGrid::new(2.0 * std::f64::consts::PI, 16)?;
    let mut out = Vec::new();
    for &mu in mu_grid {
        for c in [0.0, mu - 1.0] {
            let r = steady_residual(&EvenPeriodicFunction::constant(&grid, c), mu).sup_norm();
            out.push(
                Check::new("constant_solution", REF, -r, 1e-14)
                    .with("mu", mu)
                    .with("c", c),
            );
        }
        for c in [0.5 * (mu - 1.0), mu - 1.0 + 0.2] {
            let r = steady_residual(&EvenPeriodicFunction::constant(&grid, c), mu);
            let expected = c * (c - (mu - 1.0));
            let defect = r.values().iter().map(|v| (v - expected).abs()).fold(0.0, f64::max);
            out.push(Check {
                passed: defect < 1e-14 && expected.abs() > 0.0,
                ..Check::new("constant_nonsolution", REF, expected.abs(), 0.0)
                    .with("mu", mu)
                    .with("c", c)
                    .with("residual", expected)
            });
        }
    }
    Ok(out)
}

/// μ ≥ 1 + 1e-6 for a nontrivial solitary wave.
pub fn check_supercritical(wave: &SolitaryWave) -> Check {
    Check::new(
        "supercritical",
        "nonvanishing solitary waves have μ > 1",
        wave.mu - 1.0 - 1e-6,
        0.0,
    )
}

/// max φ = φ(0) = μ − 1 + λ(1 − μ/2).
pub fn check_crest_identity(wave: &SolitaryWave, tol: f64) -> Check {
    let crest = wave.crest();
    let bound = wave.crest_bound();
    let max = wave.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let defect = (crest - bound).abs().max((max - crest).abs());
    Check::new("crest_identity", "φ(0) = μ − 1 + λ(1 − μ/2)", tol - defect, 0.0)
        .with("defect", defect)
}

/// λ = (2 − (2 − α)μ)/(2 − μ) for the measured triple.
pub fn check_height_map(wave: &SolitaryWave, tol: f64) -> Result<Check> {
    let lam = lambda_from_alpha(wave.alpha, wave.mu)?;
    let defect = (lam - wave.lambda).abs();
    Ok(Check::new("height_map", "λ = (2 − (2 − α)μ)/(2 − μ)", tol - defect, 0.0)
        .with("defect", defect))
}

pub fn check_decay(wave: &SolitaryWave) -> Check {
    match wave.decay {
        Some(d) => Check {
            passed: d.eta > 0.0 && !d.poor_fit,
            ..Check::new("decay", "exponential decay", d.eta, 0.0).with("r_squared", d.r_squared)
        },
        None => Check {
            passed: false,
            ..Check::new("decay", "exponential decay", 0.0, 0.0)
        },
    }
}

pub fn verify_periodic(wave: &PeriodicWave, config: &VerifyConfig) -> VerificationReport {
    let mut checks = check_periodic_bounds(wave, config.bound_tol);
    if wave.period >= 1.0 {
        checks.push(check_cusp_estimate(&wave.profile, wave.mu, &config.delta_grid));
    }
    VerificationReport {
        subject: format!("periodic wave P = {}, λ = {}, N = {}", wave.period, wave.lambda, wave.n()),
        checks,
    }
}

pub fn verify_solitary(wave: &SolitaryWave, config: &VerifyConfig) -> Result<VerificationReport> {
    let checks = vec![
        check_supercritical(wave),
        check_crest_identity(wave, config.identity_tol),
        check_height_map(wave, config.identity_tol)?,
        check_l2_identity(wave, config.l2_tol)?,
        check_speed_bound(wave, config)?,
        check_decay(wave),
        check_cusp_estimate(&wave.profile, wave.mu, &config.delta_grid),
    ];
    Ok(VerificationReport {
        subject: format!("solitary wave λ = {}", wave.lambda),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_bound_arithmetic() {
        let k = KernelEvaluator::default();
        let pass = speed_bound(0.5, 1.2, 0.05, &k).unwrap();
        assert!(pass.passed);
        assert!((pass.margin - (2.0 / 1.5 - 1.2)).abs() < 1e-15);
        // 2/(2 − 0.5) = 4/3 < 1.4
        let above = speed_bound(0.5, 1.4, 0.05, &k).unwrap();
        assert!(!above.passed && (above.margin + 0.2 / 3.0).abs() < 1e-15);
        let fail = speed_bound(0.5, 1.5, 0.05, &k).unwrap();
        assert!(!fail.passed && fail.margin < 0.0);
        assert!(speed_bound(1.0, 1.99, 0.05, &k).unwrap().passed);
    }

    #[test]
    fn constant_solutions() {
        let checks = check_constant_solutions(&[1.3, 0.8]).unwrap();
        assert!(checks.iter().all(|c| c.passed));
        let r = checks
            .iter()
            .find(|c| c.name == "constant_nonsolution" && c.details["c"] == 0.3 + 0.2)
            .unwrap();
        assert!((r.details["residual"] - 0.5 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn flat_crest_violates_cusp_estimate() {
        let g = PeriodicGrid::new(4.0, 64).unwrap();
        let mu = 1.2;
        let flat = EvenPeriodicFunction::constant(&g, 0.5 * mu);
        assert!(!check_cusp_estimate(&flat, mu, &[1e-3, 1e-2, 0.1]).passed);
    }

    #[test]
    fn holder_fit_of_square_root() {
        let pos: Vec<f64> = (0..200).map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 199.0)).collect();
        let mut x: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
        x.push(0.0);
        x.extend(&pos);
        let phi: Vec<f64> = x.iter().map(|x| 1.0 - x.abs().sqrt()).collect();
        let fit = holder_exponent_at_crest(&x, &phi).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-3);
        let narrow: Vec<f64> = vec![-0.1, -0.05, 0.0, 0.05, 0.1];
        let p: Vec<f64> = narrow.iter().map(|x| 1.0 - x.abs().sqrt()).collect();
        assert!(matches!(holder_exponent_at_crest(&narrow, &p), Err(Error::Resolution(_))));
    }

    #[test]
    fn equal_speed_touching_coefficient() {
        let (lambda, mu) = (0.3, 1.4);
        let crest = mu - 1.0 + lambda * (1.0 - 0.5 * mu);
        let c = touching_coefficient(mu, crest, crest);
        assert!((c - (1.0 - lambda) * (2.0 - mu)).abs() < 1e-15);
    }
}
