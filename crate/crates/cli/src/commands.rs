//! The six subcommands.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use whitham_core::kernel::{KernelEvaluator, PeriodizationMethod, PeriodizedKernel};
use whitham_core::solitary::{extract_solitary, period_sweep, SolitaryWave, SweepConfig};
use whitham_core::solver::{
    continue_in_lambda, default_nodes, solve_cusp, Continuation, CuspMode, PeriodicWave,
    SolverConfig,
};
use whitham_core::spectral::{steady_residual, PeriodicGrid};
use whitham_core::verify::{
    check_touching, verify_periodic, verify_solitary, Check, VerificationReport, VerifyConfig,
};
use whitham_core::Error as CoreError;

use crate::args::{
    BranchArgs, KernelArgs, Method, PeriodicArgs, ReportArgs, SolitaryArgs, SolverArgs, VerifyArgs,
};
use crate::config::usage;
use crate::docs::{
    csv, num, opt_num, profile_csv, read_document, write_atomic, write_document, Body, BranchDoc,
    FailureDoc, PeriodicDoc, SolitaryDoc,
};

/// Slack for stored values against those rebuilt from the coefficients.
const DOCUMENT_TOL: f64 = 1e-10;
/// Largest residual accepted when re-checking a stored wave.
const RESIDUAL_TOL: f64 = 1e-8;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn height(v: f64) -> Result<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(usage(format!("λ must lie in (0, 1], got {v}")))
    }
}

fn increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage(format!("--{name} must be strictly increasing")));
    }
    Ok(())
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(t) = a.tol {
        cfg.tol = positive("tol", t)?;
    }
    if let Some(m) = a.max_iter {
        if m == 0 {
            return Err(usage("--max-iter must be positive"));
        }
        cfg.max_iter = m;
    }
    if let Some(s) = a.step_floor {
        cfg.step_floor = positive("step-floor", s)?;
    }
    Ok(cfg)
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes a failure document at `path` and returns the original error.
fn fail(command: &str, path: &Path, err: CoreError) -> anyhow::Error {
    let (sweep, last_iterate) = match &err {
        CoreError::SweepNotConverged(r) => (Some((**r).clone()), None),
        CoreError::Divergence { last, .. } => (None, Some(PeriodicDoc::from_wave(last))),
        _ => (None, None),
    };
    let doc = Body::Failure(FailureDoc {
        command: command.into(),
        message: err.to_string(),
        sweep,
        last_iterate,
    });
    if let Err(e) = write_document(path, &doc) {
        return e.context(err.to_string());
    }
    anyhow::Error::new(err).context(format!("diagnostics written to {}", path.display()))
}

pub fn kernel(a: KernelArgs) -> Result<()> {
    let periods = a.periods.unwrap_or_else(|| vec![2.0 * PI]);
    for &p in &periods {
        positive("periods", p)?;
    }
    let xmin = a.xmin.unwrap_or(0.05);
    let xmax = a.xmax.unwrap_or(5.0);
    let count = a.count.unwrap_or(100);
    if !(xmin > 0.0 && xmax > xmin) || count < 2 {
        return Err(usage("need 0 < xmin < xmax and count ≥ 2"));
    }
    let mut evaluator = KernelEvaluator::default();
    if let Some(t) = a.quadrature_tol {
        evaluator.quadrature_tol = positive("quadrature-tol", t)?;
    }
    let method = match a.method.unwrap_or(Method::Fourier) {
        Method::Spatial => PeriodizationMethod::Spatial,
        Method::Fourier => PeriodizationMethod::Fourier,
    };
    let pks = periods
        .iter()
        .map(|&p| PeriodizedKernel::new(evaluator.clone(), p))
        .collect::<Result<Vec<_>, _>>()?;

    let titles: Vec<String> = periods.iter().map(|p| format!("K_P(P={})", num(*p))).collect();
    let mut header = vec!["x", "K", "K_reg"];
    header.extend(titles.iter().map(String::as_str));
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let x = xmin + (xmax - xmin) * i as f64 / (count - 1) as f64;
        let mut row = vec![
            num(x),
            num(evaluator.kernel_point(x)?),
            num(evaluator.regular_part(x)?),
        ];
        for pk in &pks {
            row.push(num(pk.eval(x, method)?));
        }
        rows.push(row);
    }
    let table = csv(&header, rows);
    match a.out {
        Some(path) => write_atomic(&path, table.as_bytes()),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn write_periodic(prefix: &Path, wave: &PeriodicWave) -> Result<()> {
    write_document(&with_ext(prefix, "json"), &Body::Periodic(PeriodicDoc::from_wave(wave)))?;
    let x = wave.grid().nodes();
    write_atomic(&with_ext(prefix, "csv"), profile_csv(&x, wave.profile.values()).as_bytes())
}

pub fn periodic(a: PeriodicArgs) -> Result<()> {
    let cfg = solver_config(&a.solver)?;
    let prefix = a.out.unwrap_or_else(|| PathBuf::from("periodic"));
    let doc_path = with_ext(&prefix, "json");
    let result = if a.cusp.unwrap_or(false) {
        let mut mode = CuspMode::default();
        if let Some(l) = a.lambda {
            mode.lambda = height(l)?;
        }
        if let Some(p) = a.period {
            mode.period = positive("period", p)?;
        }
        if let Some(n) = a.nodes {
            mode.fine_nodes = n;
        }
        solve_cusp(&mode, &cfg)
    } else {
        let period = positive("period", a.period.unwrap_or(2.0 * PI))?;
        let lambda = height(a.lambda.unwrap_or(0.5))?;
        let n = a.nodes.unwrap_or_else(|| default_nodes(lambda));
        let grid = PeriodicGrid::new(period, n).map_err(|e| usage(e.to_string()))?;
        Continuation::new(&grid, &cfg).advance_to(lambda)
    };
    let wave = result.map_err(|e| fail("periodic", &doc_path, e))?;
    write_periodic(&prefix, &wave)?;
    println!(
        "P = {}  λ = {}  N = {}  μ = {}  residual = {:.3e}",
        wave.period,
        wave.lambda,
        wave.n(),
        num(wave.mu),
        wave.residual_norm
    );
    Ok(())
}

pub fn branch(a: BranchArgs) -> Result<()> {
    let cfg = solver_config(&a.solver)?;
    let period = positive("period", a.period.unwrap_or(2.0 * PI))?;
    let lambdas = a
        .lambdas
        .unwrap_or_else(|| (1..=9).map(|i| i as f64 / 10.0).collect());
    if lambdas.is_empty() {
        return Err(usage("--lambdas must not be empty"));
    }
    for &l in &lambdas {
        height(l)?;
    }
    increasing("lambdas", &lambdas)?;
    let n = a
        .nodes
        .unwrap_or_else(|| default_nodes(*lambdas.last().unwrap()));
    let grid = PeriodicGrid::new(period, n).map_err(|e| usage(e.to_string()))?;
    let prefix = a.out.unwrap_or_else(|| PathBuf::from("branch"));
    let doc_path = with_ext(&prefix, "json");
    let branch = continue_in_lambda(&grid, &lambdas, &cfg).map_err(|e| fail("branch", &doc_path, e))?;
    write_document(&doc_path, &Body::Branch(BranchDoc::from_branch(&branch)))?;
    let table = csv(
        &["lambda", "mu", "crest", "residual", "iterations"],
        branch.points.iter().map(|w| {
            vec![
                num(w.lambda),
                num(w.mu),
                num(w.crest()),
                num(w.residual_norm),
                w.iterations.to_string(),
            ]
        }),
    );
    write_atomic(&with_ext(&prefix, "csv"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn schedule(a: &SolitaryArgs) -> Result<Vec<f64>> {
    if let Some(s) = &a.schedule {
        increasing("schedule", s)?;
        return Ok(s.clone());
    }
    let pmin = positive("pmin", a.pmin.unwrap_or(32.0))?;
    let pmax = positive("pmax", a.pmax.unwrap_or(256.0))?;
    if pmax < pmin {
        return Err(usage("--pmax must not be below --pmin"));
    }
    let mut s = vec![pmin];
    while *s.last().unwrap() * 2.0 <= pmax * (1.0 + 1e-12) {
        s.push(s.last().unwrap() * 2.0);
    }
    Ok(s)
}

pub fn solitary(a: SolitaryArgs) -> Result<()> {
    let lambda = height(a.lambda.unwrap_or(0.5))?;
    let periods = schedule(&a)?;
    let window = positive("window", a.window.unwrap_or(10.0))?;
    let mut cfg = SweepConfig {
        solver: solver_config(&a.solver)?,
        points_per_unit: a.points_per_unit,
        ..SweepConfig::default()
    };
    if let Some(t) = a.sweep_tol {
        cfg.tol = positive("sweep-tol", t)?;
    }
    let prefix = a.out.unwrap_or_else(|| PathBuf::from("solitary"));
    let doc_path = with_ext(&prefix, "json");
    let wave = period_sweep(lambda, &periods, window, &cfg)
        .and_then(|s| extract_solitary(&s))
        .map_err(|e| match e {
            CoreError::Domain(m) | CoreError::Precondition(m) => usage(m),
            e => fail("solitary", &doc_path, e),
        })?;
    write_document(&doc_path, &Body::Solitary(SolitaryDoc::from_wave(&wave)))?;
    write_atomic(&with_ext(&prefix, "csv"), profile_csv(&wave.x, &wave.phi).as_bytes())?;
    let report = verify_solitary(&wave, &VerifyConfig::default())?;
    write_document(&with_ext(&prefix, "verify.json"), &Body::Report(report.clone()))?;
    println!(
        "λ = {}  μ = {}  α = {}  η = {}",
        wave.lambda,
        num(wave.mu),
        num(wave.alpha),
        opt_num(wave.eta())
    );
    print!("{}", report.table());
    Ok(())
}

fn document_check(name: &str, mismatch: f64) -> Check {
    Check {
        name: name.into(),
        passed: mismatch <= DOCUMENT_TOL,
        margin: DOCUMENT_TOL - mismatch,
        tolerance: DOCUMENT_TOL,
        reference: "stored values agree with the coefficients".into(),
        details: BTreeMap::new(),
    }
}

fn residual_check(r: f64) -> Check {
    Check {
        name: "residual".into(),
        passed: r <= RESIDUAL_TOL,
        margin: RESIDUAL_TOL - r,
        tolerance: RESIDUAL_TOL,
        reference: "steady equation residual at the nodes".into(),
        details: BTreeMap::new(),
    }
}

fn periodic_report(doc: &PeriodicDoc, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let wave = doc.to_wave()?;
    let mut report = verify_periodic(&wave, cfg);
    report.checks.push(document_check("stored_values", doc.value_mismatch()?));
    report.checks.push(residual_check(steady_residual(&wave.profile, wave.mu).sup_norm()));
    Ok(report)
}

fn solitary_report(doc: &SolitaryDoc, cfg: &VerifyConfig) -> Result<(SolitaryWave, VerificationReport)> {
    let wave = doc.to_wave()?;
    let mut report = verify_solitary(&wave, cfg)?;
    let scale = wave.profile.sup_norm().max(1e-300);
    let mismatch = wave
        .x
        .iter()
        .zip(&wave.phi)
        .map(|(&x, &p)| (wave.profile.eval_at(x) - p).abs() / scale)
        .fold(0.0, f64::max);
    report.checks.push(document_check("stored_values", mismatch));
    report.checks.push(residual_check(steady_residual(&wave.profile, wave.mu).sup_norm()));
    Ok((wave, report))
}

fn solitary_input(path: &Path) -> Result<SolitaryDoc> {
    match read_document(path)? {
        Body::Solitary(d) => Ok(d),
        other => bail!("{} holds a {} document, expected solitary", path.display(), other.kind()),
    }
}

pub fn verify(a: VerifyArgs) -> Result<bool> {
    let input = a.input.ok_or_else(|| usage("--in is required"))?;
    let mut cfg = VerifyConfig::default();
    if let Some(d) = a.delta {
        cfg.speed_delta = positive("delta", d)?;
    }
    if let Some(t) = a.l2_tol {
        cfg.l2_tol = positive("l2-tol", t)?;
    }
    let body = read_document(&input)?;
    if a.against.is_some() && !matches!(body, Body::Solitary(_)) {
        return Err(usage("--against needs a solitary wave document as --in"));
    }
    let report = match body {
        Body::Periodic(d) => periodic_report(&d, &cfg)?,
        Body::Branch(b) => {
            let mut checks = Vec::new();
            for (i, d) in b.points.iter().enumerate() {
                for mut c in periodic_report(d, &cfg)?.checks {
                    c.name = format!("{i}:{}", c.name);
                    checks.push(c);
                }
            }
            VerificationReport {
                subject: format!("branch P = {}, {} points", b.period, b.points.len()),
                checks,
            }
        }
        Body::Solitary(d) => {
            let (wave, mut report) = solitary_report(&d, &cfg)?;
            if let Some(other) = &a.against {
                let other = solitary_input(other)?.to_wave()?;
                let t = check_touching(&wave, &other, cfg.bound_tol)?;
                println!(
                    "touching: {:?}  x_min = {}  ψ_min = {}  c(x_min) = {}",
                    t.case,
                    num(t.x_min),
                    num(t.psi_min),
                    num(t.c_at_min)
                );
                report.checks.push(t.check);
            }
            report
        }
        Body::Report(_) => bail!("{} is a report, not a wave", input.display()),
        Body::Failure(f) => bail!("{} records a failed {} run: {}", input.display(), f.command, f.message),
    };
    print!("{}", report.table());
    if let Some(out) = &a.out {
        write_document(out, &Body::Report(report.clone()))?;
    }
    Ok(report.passed())
}

pub fn report(a: ReportArgs) -> Result<()> {
    let mut waves = Vec::new();
    let mut sweeps = Vec::new();
    let periodic_row = |d: &PeriodicDoc| {
        // α equals λ for a periodic wave
        vec![num(d.lambda), num(d.mu), num(d.lambda), String::new(), num(d.residual_norm)]
    };
    for path in a.inputs.unwrap_or_default() {
        match read_document(&path)? {
            Body::Periodic(d) => waves.push(periodic_row(&d)),
            Body::Branch(b) => waves.extend(b.points.iter().map(periodic_row)),
            Body::Solitary(d) => {
                let r = &d.sweep;
                waves.push(vec![
                    num(d.lambda),
                    num(d.mu),
                    num(d.alpha),
                    opt_num(d.decay.map(|f| f.eta)),
                    opt_num(r.residuals.last().copied()),
                ]);
                for i in 0..r.periods.len() {
                    let diff = |v: &[f64]| if i == 0 { String::new() } else { opt_num(v.get(i - 1).copied()) };
                    sweeps.push(vec![
                        num(d.lambda),
                        num(r.periods[i]),
                        r.nodes[i].to_string(),
                        num(r.speeds[i]),
                        diff(&r.speed_differences),
                        diff(&r.profile_differences),
                    ]);
                }
            }
            other => bail!("{} holds a {} document; report reads waves", path.display(), other.kind()),
        }
    }
    let prefix = a.out.unwrap_or_else(|| PathBuf::from("report"));
    let w = csv(&["lambda", "mu", "alpha", "eta", "residual"], waves);
    let s = csv(
        &["lambda", "period", "nodes", "mu_p", "speed_difference", "profile_difference"],
        sweeps,
    );
    write_atomic(&with_ext(&prefix, "waves.csv"), w.as_bytes())?;
    write_atomic(&with_ext(&prefix, "sweeps.csv"), s.as_bytes())?;
    print!("{w}");
    Ok(())
}
