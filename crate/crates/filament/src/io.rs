//! File formats: curve JSON, report CSV/JSON, trajectories and manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use filament_core::asymptotics::{AsymptoticsReport, SweepBands};
use filament_core::curve::CurveSpec;
use filament_core::evolve::Diagnostics;
use filament_core::Vec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("curve file not found: {0}")]
    CurveNotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid curve: {0}")]
    Curve(#[from] filament_core::Error),
    #[error("curve file declares K = {declared} but has {cos} cosine and {sin} sine coefficients")]
    OrderMismatch { declared: usize, cos: usize, sin: usize },
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
}

/// On-disk curve: `{"K": int, "cos": [[x, y, z], ...], "sin": [[x, y, z], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    #[serde(rename = "K")]
    pub order: usize,
    pub cos: Vec<[f64; 3]>,
    pub sin: Vec<[f64; 3]>,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl CurveFile {
    pub fn from_curve(curve: &CurveSpec) -> Self {
        Self {
            order: curve.order(),
            cos: curve.cos_coeffs().iter().map(arr).collect(),
            sin: curve.sin_coeffs().iter().map(arr).collect(),
        }
    }

    pub fn to_curve(&self) -> Result<CurveSpec, IoError> {
        if self.cos.len() != self.order + 1 || self.sin.len() != self.order {
            return Err(IoError::OrderMismatch {
                declared: self.order,
                cos: self.cos.len(),
                sin: self.sin.len(),
            });
        }
        let v = |c: &[[f64; 3]]| c.iter().map(|a| Vec3::new(a[0], a[1], a[2])).collect();
        Ok(CurveSpec::new(v(&self.cos), v(&self.sin))?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_curve_file(path: &Path) -> Result<CurveFile, IoError> {
    if !path.is_file() {
        return Err(IoError::CurveNotFound(path.to_path_buf()));
    }
    read_json(path)
}

pub fn read_curve(path: &Path) -> Result<CurveSpec, IoError> {
    read_curve_file(path)?.to_curve()
}

pub fn write_curve(path: &Path, curve: &CurveSpec) -> Result<(), IoError> {
    write_json(path, &CurveFile::from_curve(curve))
}

fn num(x: f64) -> String {
    x.to_string()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, IoError> {
    let file = fs::File::create(path).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

pub const REPORT_COLUMNS: [&str; 12] = [
    "alpha",
    "tau",
    "eps",
    "ux",
    "uy",
    "uz",
    "C_hat",
    "wx",
    "wy",
    "wz",
    "fitRate",
    "fitResidual",
];

/// Marker written in the `eps` column of the row that records a failed cell.
pub const FAILURE_MARKER: &str = "FAILED";

/// A cell that did not produce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub alpha: f64,
    pub tau: f64,
    pub message: String,
}

/// One row per scale with `u_eps`, then a row with `eps = 0` holding the
/// extrapolated limit. Report-level columns repeat on every row.
pub fn write_reports_csv<W: Write>(
    out: W,
    reports: &[AsymptoticsReport],
    failure: Option<&Failure>,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        let tail = [
            num(r.c_hat),
            num(r.w_hat.x),
            num(r.w_hat.y),
            num(r.w_hat.z),
            num(r.fit_rate),
            num(r.fit_residual),
        ];
        let rows = r
            .epsilons
            .iter()
            .zip(&r.u_values)
            .map(|(e, u)| (*e, *u))
            .chain(std::iter::once((0.0, r.u_limit)));
        for (eps, u) in rows {
            let mut rec = vec![num(r.alpha), num(r.tau), num(eps), num(u.x), num(u.y), num(u.z)];
            rec.extend(tail.iter().cloned());
            w.write_record(&rec)?;
        }
    }
    if let Some(f) = failure {
        let mut rec = vec![num(f.alpha), num(f.tau), FAILURE_MARKER.to_string()];
        rec.resize(REPORT_COLUMNS.len(), String::new());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn write_reports_csv_file(
    path: &Path,
    reports: &[AsymptoticsReport],
    failure: Option<&Failure>,
) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    write_reports_csv(file, reports, failure)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub alpha: f64,
    pub tau: f64,
    pub epsilons: Vec<f64>,
    pub u_values: Vec<[f64; 3]>,
    pub u_limit: [f64; 3],
    pub c_hat: f64,
    pub w_hat: [f64; 3],
    pub fit_rate: f64,
    pub fit_residual: f64,
    pub curvature: f64,
    pub binormal: [f64; 3],
    pub binormal_component: f64,
}

impl From<&AsymptoticsReport> for ReportRecord {
    fn from(r: &AsymptoticsReport) -> Self {
        Self {
            alpha: r.alpha,
            tau: r.tau,
            epsilons: r.epsilons.clone(),
            u_values: r.u_values.iter().map(arr).collect(),
            u_limit: arr(&r.u_limit),
            c_hat: r.c_hat,
            w_hat: arr(&r.w_hat),
            fit_rate: r.fit_rate,
            fit_residual: r.fit_residual,
            curvature: r.curvature,
            binormal: arr(&r.binormal),
            binormal_component: r.binormal_component(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandsRecord {
    pub sign_consistent: bool,
    pub c_min: f64,
    pub c_max: f64,
    pub c_ratio: f64,
    pub w_max: f64,
    pub w_at_largest_alpha: f64,
    pub binormal_growth: f64,
}

impl From<&SweepBands> for BandsRecord {
    fn from(b: &SweepBands) -> Self {
        Self {
            sign_consistent: b.sign_consistent,
            c_min: b.c_min,
            c_max: b.c_max,
            c_ratio: b.c_ratio(),
            w_max: b.w_max,
            w_at_largest_alpha: b.w_at_largest_alpha,
            binormal_growth: b.binormal_growth,
        }
    }
}

/// Normalization of the reported numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convention {
    pub c_alpha: f64,
    pub circulation: String,
    pub c_hat: String,
    pub extrapolation: String,
}

impl Default for Convention {
    fn default() -> Self {
        Self {
            c_alpha: 1.0,
            circulation: "kernel integrated against the parameter measure dtau".into(),
            c_hat: "alpha * (u_limit . B) / kappa".into(),
            extrapolation: "u(eps) = u_limit + A eps^rate per component, shared rate".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub kind: String,
    pub convention: Convention,
    pub epsilons: Vec<f64>,
    pub reports: Vec<ReportRecord>,
    pub bands: Option<BandsRecord>,
    pub failure: Option<Failure>,
}

pub const DIAGNOSTIC_COLUMNS: [&str; 9] = [
    "step", "time", "length", "kappaMax", "kappaMin", "selfDist", "comX", "comY", "comZ",
];

pub fn write_diagnostics_csv(path: &Path, diags: &[Diagnostics]) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    w.write_record(DIAGNOSTIC_COLUMNS)?;
    for d in diags {
        w.write_record([
            d.step.to_string(),
            num(d.time),
            num(d.length),
            num(d.kappa_max),
            num(d.kappa_min),
            num(d.self_distance),
            num(d.center.x),
            num(d.center.y),
            num(d.center.z),
        ])?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

/// Writes a table of already formatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn format_cell(x: f64) -> String {
    num(x)
}
