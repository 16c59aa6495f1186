//! Versioned JSON documents and CSV tables.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use whitham_core::solitary::{DecayFit, SolitaryWave, SweepRecord};
use whitham_core::solver::{Branch, PeriodicWave};
use whitham_core::spectral::{EvenPeriodicFunction, PeriodicGrid};
use whitham_core::verify::VerificationReport;

pub const SCHEMA: &str = "1.0";
const SCHEMA_MAJOR: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicDoc {
    pub period: f64,
    pub lambda: f64,
    pub mu: f64,
    pub nodes: usize,
    pub residual_norm: f64,
    pub iterations: usize,
    pub coefficients: Vec<f64>,
    /// Values at x_j = −P/2 + jP/N.
    pub values: Vec<f64>,
}

impl PeriodicDoc {
    pub fn from_wave(w: &PeriodicWave) -> Self {
        Self {
            period: w.period,
            lambda: w.lambda,
            mu: w.mu,
            nodes: w.n(),
            residual_norm: w.residual_norm,
            iterations: w.iterations,
            coefficients: w.profile.coeffs().to_vec(),
            values: w.profile.values().to_vec(),
        }
    }

    /// Rebuilds the wave from its coefficients; stored values are only
    /// compared, see [`PeriodicDoc::value_mismatch`].
    pub fn to_wave(&self) -> Result<PeriodicWave> {
        let grid = PeriodicGrid::new(self.period, self.nodes)?;
        let profile = EvenPeriodicFunction::from_coeffs(&grid, self.coefficients.clone())?;
        Ok(PeriodicWave {
            period: self.period,
            lambda: self.lambda,
            mu: self.mu,
            profile,
            residual_norm: self.residual_norm,
            iterations: self.iterations,
        })
    }

    /// Largest relative gap between stored values and those synthesized
    /// from the coefficients.
    pub fn value_mismatch(&self) -> Result<f64> {
        let w = self.to_wave()?;
        if w.profile.values().len() != self.values.len() {
            bail!("document holds {} values for {} nodes", self.values.len(), self.nodes);
        }
        let scale = w.profile.sup_norm().max(1e-300);
        Ok(w.profile
            .values()
            .iter()
            .zip(&self.values)
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDoc {
    pub period: f64,
    pub points: Vec<PeriodicDoc>,
}

impl BranchDoc {
    pub fn from_branch(b: &Branch) -> Self {
        Self {
            period: b.period,
            points: b.points.iter().map(PeriodicDoc::from_wave).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitaryDoc {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub window: f64,
    pub decay: Option<DecayFit>,
    pub period: f64,
    pub nodes: usize,
    /// Cosine coefficients of the shifted profile on the last period.
    pub coefficients: Vec<f64>,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub sweep: SweepRecord,
}

impl SolitaryDoc {
    pub fn from_wave(w: &SolitaryWave) -> Self {
        Self {
            lambda: w.lambda,
            mu: w.mu,
            nu: w.nu,
            alpha: w.alpha,
            window: w.window,
            decay: w.decay,
            period: w.profile.grid().period(),
            nodes: w.profile.grid().n(),
            coefficients: w.profile.coeffs().to_vec(),
            x: w.x.clone(),
            phi: w.phi.clone(),
            sweep: w.sweep.clone(),
        }
    }

    pub fn to_wave(&self) -> Result<SolitaryWave> {
        let grid = PeriodicGrid::new(self.period, self.nodes)?;
        let profile = EvenPeriodicFunction::from_coeffs(&grid, self.coefficients.clone())?;
        if self.x.len() != self.phi.len() {
            bail!("solitary document has {} abscissae and {} values", self.x.len(), self.phi.len());
        }
        Ok(SolitaryWave {
            lambda: self.lambda,
            mu: self.mu,
            nu: self.nu,
            alpha: self.alpha,
            window: self.window,
            x: self.x.clone(),
            phi: self.phi.clone(),
            decay: self.decay,
            profile,
            sweep: self.sweep.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDoc {
    pub command: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_iterate: Option<PeriodicDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Body {
    Periodic(PeriodicDoc),
    Branch(BranchDoc),
    Solitary(SolitaryDoc),
    Report(VerificationReport),
    Failure(FailureDoc),
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Periodic(_) => "periodic",
            Body::Branch(_) => "branch",
            Body::Solitary(_) => "solitary",
            Body::Report(_) => "report",
            Body::Failure(_) => "failure",
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a Body,
}

pub fn to_json(body: &Body) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA,
        body,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Body> {
    let mut value: Value = serde_json::from_str(text).context("not a JSON document")?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| anyhow!("document must be a JSON object"))?;
    let schema = obj
        .remove("schema")
        .and_then(|v| v.as_str().map(str::to_owned))
        .ok_or_else(|| anyhow!("document has no schema version"))?;
    let major = schema.split('.').next().unwrap_or_default();
    if major != SCHEMA_MAJOR {
        bail!("unsupported schema version {schema}; this build reads {SCHEMA_MAJOR}.x");
    }
    serde_json::from_value(value).context("document does not match the schema")
}

pub fn read_document(path: &Path) -> Result<Body> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("in {}", path.display()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| anyhow!("renaming into {}: {}", path.display(), e.error))?;
    Ok(())
}

/// Writes the document and a `.version` sidecar naming the producer.
pub fn write_document(path: &Path, body: &Body) -> Result<()> {
    write_atomic(path, to_json(body)?.as_bytes())?;
    let mut side = path.as_os_str().to_owned();
    side.push(".version");
    let stamp = format!(
        "producer = \"{} {}\"\nschema = \"{}\"\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        SCHEMA
    );
    write_atomic(Path::new(&side), stamp.as_bytes())
}

/// Formats a float with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// CSV with a header row.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

pub fn profile_csv(x: &[f64], phi: &[f64]) -> String {
    csv(
        &["x", "phi"],
        x.iter().zip(phi).map(|(x, p)| vec![num(*x), num(*p)]),
    )
}
