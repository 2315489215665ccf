//! Command implementations. Validation runs to completion before any
//! expensive computation; its failures map to exit status 2, failures during
//! computation to exit status 3.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use filament_core::asymptotics::{self, classical_log_check, eps_sweep, AsymptoticsReport, MIN_EPSILONS};
use filament_core::curve::CurveSpec;
use filament_core::evolve::{CoefficientSource, Evolver, SimConfig, VelocityMode};
use filament_core::expansion::remainder_order_fit;
use filament_core::frame::FrameField;
use filament_core::kernel::{KernelEvaluator, KernelParams, QuadratureSpec};
use filament_core::mollify::{u_eps_oracle_with, MollifierSpec, TubeQuadrature, REACH_FRACTION};
use filament_core::Vec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::args::*;
use crate::io::{self, format_cell as cell, BandsRecord, Convention, CurveFile, Failure, ReportRecord, SweepDocument};

pub const MANIFEST_FILE: &str = "manifest.json";
/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "FILAMENT_THREADS";
/// Nodes of the constant-speed refit applied to input curves.
pub const ARC_LENGTH_SAMPLES: usize = 4096;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

fn invalid(e: impl Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn numerical(e: impl Display) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Full record of a run: re-executing `command` on `curve` reproduces the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub curve: CurveFile,
}

/// Thread count from the environment override, then the flag.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        _ => flag,
    };
    if n == Some(0) {
        return Err(invalid("thread count must be positive"));
    }
    Ok(n)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let threads = thread_count(cli.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(invalid)?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Replay(r) => {
            let manifest: Manifest = io::read_json(&r.manifest).map_err(invalid)?;
            if manifest.version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: manifest written by version {}, replaying with {}",
                    manifest.version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            let mut command = manifest.command;
            match command.io_mut() {
                Some(io) => io.out = Some(r.out),
                None => return Err(invalid("manifest does not record a command")),
            }
            execute(&command, &manifest.curve)
        }
        command => {
            let path = &command.io().expect("non-replay command").curve;
            let file = io::read_curve_file(path).map_err(invalid)?;
            execute(&command, &file)
        }
    }
}

/// Runs `command` on the given curve data.
pub fn execute(command: &Command, file: &CurveFile) -> Result<(), CliError> {
    let mut curve = file.to_curve().map_err(invalid)?;
    if let Some(io) = command.io().filter(|io| !io.keep_parametrization) {
        curve = curve
            .reparametrize_by_arc_length(io.arc_length_order, ARC_LENGTH_SAMPLES)
            .map_err(invalid)?;
    }
    let out = command.io().and_then(|io| io.out.clone());
    let sink = Sink { dir: out };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.clone(),
        curve: file.clone(),
    };
    match command {
        Command::Velocity(a) => velocity(a, &curve, &sink, &manifest),
        Command::SweepEps(a) => sweep_eps(a, &curve, &sink, &manifest),
        Command::SweepAlpha(a) => sweep_alpha(a, &curve, &sink, &manifest),
        Command::ClassicalLog(a) => classical_log(a, &curve, &sink, &manifest),
        Command::Evolve(a) => evolve(a, &curve, &sink, &manifest),
        Command::ExpansionCheck(a) => expansion_check(a, &curve, &sink, &manifest),
        Command::OracleCheck(a) => oracle_check(a, &curve, &sink, &manifest),
        Command::Replay(_) => Err(invalid("replay cannot be nested")),
    }
}

/// Output directory, or stdout for the main table when absent.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    /// Creates the directory and writes the manifest; the last validation step.
    fn open(&self, manifest: &Manifest) -> Result<(), CliError> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)
                .map_err(|e| invalid(format!("cannot create output directory {}: {e}", dir.display())))?;
            io::write_json(&dir.join(MANIFEST_FILE), manifest).map_err(invalid)?;
        }
        Ok(())
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    /// Human-readable summary: stdout with an output directory, stderr otherwise.
    fn say(&self, msg: impl Display) {
        if self.dir.is_some() {
            println!("{msg}");
        } else {
            eprintln!("{msg}");
        }
    }

    fn table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        match self.path(name) {
            Some(p) => io::write_table(&p, header, rows).map_err(invalid),
            None => {
                let mut w = csv::Writer::from_writer(std::io::stdout().lock());
                w.write_record(header).map_err(invalid)?;
                for r in rows {
                    w.write_record(r).map_err(invalid)?;
                }
                w.flush().map_err(invalid)
            }
        }
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        match self.path(name) {
            Some(p) => io::write_json(&p, value).map_err(invalid),
            None => Ok(()),
        }
    }

    fn reports(&self, reports: &[AsymptoticsReport], failure: Option<&Failure>) -> Result<(), CliError> {
        match self.path("report.csv") {
            Some(p) => io::write_reports_csv_file(&p, reports, failure).map_err(invalid),
            None => io::write_reports_csv(std::io::stdout().lock(), reports, failure).map_err(invalid),
        }
    }
}

fn validated_curve(curve: &CurveSpec, tube: &TubeArgs) -> Result<f64, CliError> {
    curve.validate(tube.reach_grid).map_err(invalid)?;
    curve.security_radius(tube.reach_grid).map_err(invalid)
}

fn fractional(alpha: f64) -> Result<KernelParams, CliError> {
    KernelParams::fractional(alpha).map_err(|_| invalid(format!("alpha must lie in (0, 1/2), got {alpha}")))
}

fn check_epsilon(eps: f64, reach: f64) -> Result<MollifierSpec, CliError> {
    let m = MollifierSpec::bump(eps).map_err(invalid)?;
    let bound = REACH_FRACTION * reach;
    if !(eps < bound) {
        return Err(invalid(format!(
            "eps = {eps} must be below {REACH_FRACTION} x security radius = {bound}"
        )));
    }
    Ok(m)
}

fn check_epsilons(eps: &[f64], reach: f64) -> Result<MollifierSpec, CliError> {
    if eps.len() < MIN_EPSILONS {
        return Err(invalid(format!("need ≥ {MIN_EPSILONS} epsilons, got {}", eps.len())));
    }
    asymptotics::validate_epsilons(eps).map_err(invalid)?;
    check_epsilon(eps[0], reach)
}

fn check_taus(taus: &[f64]) -> Result<(), CliError> {
    if taus.is_empty() {
        return Err(invalid("need at least one tau"));
    }
    if taus.iter().any(|t| !t.is_finite()) {
        return Err(invalid("tau values must be finite"));
    }
    Ok(())
}

fn frame(curve: &CurveSpec, tube: &TubeArgs) -> Result<FrameField, CliError> {
    FrameField::new(curve, tube.frame_samples).map_err(invalid)
}

fn parse_point(s: &str) -> Result<Vec3, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || invalid(format!("point must be x,y,z, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// `x0:x1:nx,y0:y1:ny,z0:z1:nz` in x-major order.
fn parse_grid(s: &str) -> Result<Vec<Vec3>, CliError> {
    let bad = || invalid(format!("grid must be x0:x1:nx,y0:y1:ny,z0:z1:nz, got {s:?}"));
    let axes: Vec<&str> = s.split(',').collect();
    if axes.len() != 3 {
        return Err(bad());
    }
    let mut lines = Vec::with_capacity(3);
    for a in axes {
        let f: Vec<&str> = a.split(':').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = f[0].parse().map_err(|_| bad())?;
        let hi: f64 = f[1].parse().map_err(|_| bad())?;
        let n: usize = f[2].parse().map_err(|_| bad())?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        let vals: Vec<f64> = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        lines.push(vals);
    }
    let mut pts = Vec::new();
    for &x in &lines[0] {
        for &y in &lines[1] {
            for &z in &lines[2] {
                pts.push(Vec3::new(x, y, z));
            }
        }
    }
    Ok(pts)
}

fn velocity(a: &VelocityArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    let params = match a.mode {
        KernelChoice::Fractional => fractional(a.alpha)?,
        KernelChoice::Classical => KernelParams::classical(),
    };
    let reach = validated_curve(curve, &a.tube)?;
    let quad = QuadratureSpec::with_nodes(a.quad_nodes);
    quad.validate().map_err(invalid)?;
    let mut points = a.points.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(g) = &a.grid {
        points.extend(parse_grid(g)?);
    }
    if points.is_empty() && a.taus.is_empty() {
        return Err(invalid("no evaluation points: give --point, --grid or --tau"));
    }
    let moll = match a.eps {
        Some(e) => Some(check_epsilon(e, reach)?),
        None => None,
    };
    if moll.is_none() && !a.taus.is_empty() {
        return Err(invalid("--tau evaluates on the curve and needs --eps"));
    }
    if !a.taus.is_empty() {
        check_taus(&a.taus)?;
    }
    if moll.is_some() && a.oracle_resolution < 2 {
        return Err(invalid("oracle resolution must be at least 2"));
    }
    let evaluator = KernelEvaluator::new(curve, params, quad).map_err(invalid)?;
    if moll.is_none() {
        for p in &points {
            let (_, d) = evaluator.nearest(p);
            if d < evaluator.min_distance() {
                return Err(invalid(format!(
                    "point ({}, {}, {}) lies on the curve; the raw field is singular there",
                    p.x, p.y, p.z
                )));
            }
        }
    }
    let tube = match &moll {
        Some(_) if !a.taus.is_empty() => {
            a.tube.spec().validate().map_err(invalid)?;
            Some(TubeQuadrature::new(curve, params, frame(curve, &a.tube)?, a.tube.spec(), reach).map_err(invalid)?)
        }
        _ => None,
    };
    sink.open(manifest)?;

    let mut rows = Vec::new();
    let row = |tau: Option<f64>, x: &Vec3, u: &Vec3| {
        vec![
            tau.map(cell).unwrap_or_default(),
            cell(x.x),
            cell(x.y),
            cell(x.z),
            cell(u.x),
            cell(u.y),
            cell(u.z),
        ]
    };
    for p in &points {
        let u = match &moll {
            None => evaluator.velocity(p),
            Some(m) => u_eps_oracle_with(&evaluator, p, m, a.oracle_resolution),
        }
        .map_err(numerical)?;
        rows.push(row(None, p, &u));
    }
    if let (Some(t), Some(m)) = (&tube, &moll) {
        for &tau in &a.taus {
            let u = t.u_eps(tau, m).map_err(numerical)?;
            rows.push(row(Some(tau), &curve.position(tau), &u));
        }
    }
    sink.table("velocity.csv", &["tau", "x", "y", "z", "ux", "uy", "uz"], &rows)
}

fn sweep_document(kind: &str, eps: &[f64], reports: &[AsymptoticsReport], failure: Option<Failure>) -> SweepDocument {
    SweepDocument {
        kind: kind.into(),
        convention: Convention::default(),
        epsilons: eps.to_vec(),
        reports: reports.iter().map(ReportRecord::from).collect(),
        bands: None,
        failure,
    }
}

fn sweep_eps(a: &SweepEpsArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    let params = fractional(a.alpha)?;
    let reach = validated_curve(curve, &a.tube)?;
    let template = check_epsilons(&a.eps, reach)?;
    check_taus(&a.taus)?;
    a.tube.spec().validate().map_err(invalid)?;
    let tube = TubeQuadrature::new(curve, params, frame(curve, &a.tube)?, a.tube.spec(), reach).map_err(invalid)?;
    sink.open(manifest)?;

    let mut reports = Vec::new();
    let mut failure = None;
    for &tau in &a.taus {
        match eps_sweep(&tube, tau, &template, &a.eps) {
            Ok(r) => {
                sink.say(format_args!(
                    "alpha={} tau={} C_hat={} |w_hat|={} fitRate={} fitResidual={}",
                    r.alpha,
                    r.tau,
                    r.c_hat,
                    r.w_hat.norm(),
                    r.fit_rate,
                    r.fit_residual
                ));
                reports.push(r);
            }
            Err(e) => {
                failure = Some(Failure {
                    alpha: a.alpha,
                    tau,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    finish_sweep(sink, "sweep-eps", &a.eps, &reports, failure, None)
}

fn finish_sweep(
    sink: &Sink,
    kind: &str,
    eps: &[f64],
    reports: &[AsymptoticsReport],
    failure: Option<Failure>,
    bands: Option<BandsRecord>,
) -> Result<(), CliError> {
    sink.reports(reports, failure.as_ref())?;
    let mut doc = sweep_document(kind, eps, reports, failure.clone());
    doc.bands = bands;
    sink.json("report.json", &doc)?;
    match failure {
        Some(f) => Err(numerical(format!("alpha={} tau={}: {}", f.alpha, f.tau, f.message))),
        None => Ok(()),
    }
}

fn sweep_alpha(a: &SweepAlphaArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    if a.alphas.is_empty() {
        return Err(invalid("need at least one alpha"));
    }
    let params = a.alphas.iter().map(|&x| fractional(x)).collect::<Result<Vec<_>, _>>()?;
    let taus = a.tau_list();
    check_taus(&taus)?;
    let reach = validated_curve(curve, &a.tube)?;
    let template = check_epsilons(&a.eps, reach)?;
    a.tube.spec().validate().map_err(invalid)?;
    let frame = frame(curve, &a.tube)?;
    sink.open(manifest)?;

    let mut reports = Vec::new();
    let mut failure = None;
    sink.say("alpha,tau,binormal,C_hat,|w_hat|");
    'outer: for p in params {
        let tube = match TubeQuadrature::new(curve, p, frame.clone(), a.tube.spec(), reach) {
            Ok(t) => t,
            Err(e) => {
                failure = Some(Failure {
                    alpha: p.alpha,
                    tau: taus[0],
                    message: e.to_string(),
                });
                break;
            }
        };
        for &tau in &taus {
            match eps_sweep(&tube, tau, &template, &a.eps) {
                Ok(r) => {
                    sink.say(format_args!(
                        "{},{},{},{},{}",
                        r.alpha,
                        r.tau,
                        r.binormal_component(),
                        r.c_hat,
                        r.w_hat.norm()
                    ));
                    reports.push(r);
                }
                Err(e) => {
                    failure = Some(Failure {
                        alpha: p.alpha,
                        tau,
                        message: e.to_string(),
                    });
                    break 'outer;
                }
            }
        }
    }
    let bands = if reports.is_empty() {
        None
    } else {
        let b = asymptotics::bands(&reports);
        sink.say(format_args!(
            "sign consistent: {}; |C_hat| in [{}, {}] (ratio {}); max |w_hat| = {} (at largest alpha {}); binormal growth {}",
            b.sign_consistent,
            b.c_min,
            b.c_max,
            b.c_ratio(),
            b.w_max,
            b.w_at_largest_alpha,
            b.binormal_growth
        ));
        Some(BandsRecord::from(&b))
    };
    finish_sweep(sink, "sweep-alpha", &a.eps, &reports, failure, bands)
}

#[derive(Debug, Serialize)]
struct LogRecord<'a> {
    tau: f64,
    epsilons: &'a [f64],
    binormal: &'a [f64],
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn classical_log(a: &ClassicalLogArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    check_taus(&[a.tau])?;
    let reach = validated_curve(curve, &a.tube)?;
    let template = check_epsilons(&a.eps, reach)?;
    a.tube.spec().validate().map_err(invalid)?;
    let tube = TubeQuadrature::new(
        curve,
        KernelParams::classical(),
        frame(curve, &a.tube)?,
        a.tube.spec(),
        reach,
    )
    .map_err(invalid)?;
    sink.open(manifest)?;

    let check = classical_log_check(&tube, a.tau, &template, &a.eps).map_err(numerical)?;
    sink.say(format_args!(
        "slope = {}, intercept = {}, r2 = {}",
        check.slope, check.intercept, check.r_squared
    ));
    let rows: Vec<Vec<String>> = check
        .epsilons
        .iter()
        .zip(&check.binormal)
        .map(|(e, b)| vec![cell(*e), cell((1.0 / e).ln()), cell(*b)])
        .collect();
    sink.table("classical_log.csv", &["eps", "logInvEps", "binormal"], &rows)?;
    sink.json(
        "classical_log.json",
        &LogRecord {
            tau: a.tau,
            epsilons: &check.epsilons,
            binormal: &check.binormal,
            slope: check.slope,
            intercept: check.intercept,
            r_squared: check.r_squared,
        },
    )
}

fn coefficient(s: &str) -> Result<CoefficientSource, CliError> {
    match s {
        "per-step" => Ok(CoefficientSource::PerStep),
        "initial" => Ok(CoefficientSource::Initial),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .map(CoefficientSource::Given)
            .ok_or_else(|| {
                invalid(format!(
                    "coefficient must be per-step, initial or a number, got {other:?}"
                ))
            }),
    }
}

#[derive(Debug, Serialize)]
struct RunSummary {
    completed_steps: usize,
    final_time: f64,
    halted: Option<String>,
}

pub fn snapshot_name(step: usize) -> String {
    format!("curve_{step:06}.json")
}

fn evolve(a: &EvolveArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    if sink.dir.is_none() {
        return Err(invalid("evolve needs --out"));
    }
    let mode = match a.mode {
        EvolveMode::Mollified => {
            fractional(a.alpha)?;
            VelocityMode::Mollified {
                alpha: a.alpha,
                epsilon: a.eps,
            }
        }
        EvolveMode::Classical => VelocityMode::Classical { epsilon: a.eps },
        EvolveMode::Limiting => {
            fractional(a.alpha)?;
            VelocityMode::LimitingLaw {
                alpha: a.alpha,
                coefficient: coefficient(&a.coefficient)?,
            }
        }
    };
    let mut cfg = SimConfig::new(mode, a.dt, a.steps);
    cfg.nodes = a.nodes;
    cfg.refit_order = a.refit_order;
    cfg.diagnostics_every = a.every;
    cfg.reparametrize = !a.no_reparametrize;
    cfg.tube = a.tube.spec();
    cfg.frame_samples = a.tube.frame_samples;
    cfg.reach_grid = a.tube.reach_grid;
    cfg.sweep_epsilons = a.sweep_eps.clone();
    if matches!(
        mode,
        VelocityMode::LimitingLaw {
            coefficient: CoefficientSource::PerStep | CoefficientSource::Initial,
            ..
        }
    ) && a.sweep_eps.len() < MIN_EPSILONS
    {
        return Err(invalid(format!(
            "need ≥ {MIN_EPSILONS} epsilons, got {}",
            a.sweep_eps.len()
        )));
    }
    cfg.validate().map_err(invalid)?;
    let reach = validated_curve(curve, &a.tube)?;
    match mode {
        VelocityMode::Mollified { epsilon, .. } | VelocityMode::Classical { epsilon } => {
            check_epsilon(epsilon, reach)?;
        }
        VelocityMode::LimitingLaw { coefficient, .. } => {
            if !matches!(coefficient, CoefficientSource::Given(_)) {
                check_epsilon(cfg.sweep_epsilons[0], reach)?;
            }
        }
    }
    let mut evolver = Evolver::new(cfg).map_err(invalid)?;
    sink.open(manifest)?;

    let traj = evolver.run(curve).map_err(numerical)?;
    let dir = sink.dir.as_ref().expect("checked above");
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(|e| invalid(format!("cannot create {}: {e}", snaps.display())))?;
    for s in &traj.snapshots {
        io::write_curve(&snaps.join(snapshot_name(s.step)), &s.curve).map_err(invalid)?;
    }
    io::write_diagnostics_csv(&dir.join("diagnostics.csv"), &traj.diagnostics).map_err(invalid)?;
    let last = traj.last();
    let summary = RunSummary {
        completed_steps: last.step,
        final_time: last.time,
        halted: traj.halted.as_ref().map(|e| e.to_string()),
    };
    sink.json("summary.json", &summary)?;
    sink.say(format_args!(
        "completed {} of {} steps, t = {}",
        last.step, a.steps, last.time
    ));
    match &traj.halted {
        Some(e) => Err(numerical(format!("run halted after step {}: {e}", last.step))),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct ExpansionRecord<'a> {
    tau: f64,
    alpha: f64,
    scales: &'a [f64],
    residuals: &'a [f64],
    slope: Option<f64>,
    minimal_budget_exponent: f64,
}

fn expansion_check(a: &ExpansionArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    fractional(a.alpha)?;
    check_taus(&[a.tau])?;
    if a.scales.len() < 2
        || a.scales.iter().any(|h| !(*h > 0.0 && h.is_finite()))
        || a.scales.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(invalid(
            "scales must be at least two positive, strictly decreasing values",
        ));
    }
    curve.validate(4096).map_err(invalid)?;
    sink.open(manifest)?;

    let fit = remainder_order_fit(curve, a.tau, a.alpha, &a.scales).map_err(numerical)?;
    match fit.slope {
        Some(s) => sink.say(format_args!(
            "fitted slope = {s}, minimal budget exponent = {}",
            fit.minimal_exponent
        )),
        None => sink.say(format_args!(
            "fitted slope = none (residuals at rounding level), minimal budget exponent = {}",
            fit.minimal_exponent
        )),
    }
    let rows: Vec<Vec<String>> = fit
        .scales
        .iter()
        .zip(&fit.residuals)
        .map(|(h, r)| vec![cell(*h), cell(*r)])
        .collect();
    sink.table("expansion.csv", &["scale", "residual"], &rows)?;
    sink.json(
        "expansion.json",
        &ExpansionRecord {
            tau: a.tau,
            alpha: a.alpha,
            scales: &fit.scales,
            residuals: &fit.residuals,
            slope: fit.slope,
            minimal_budget_exponent: fit.minimal_exponent,
        },
    )
}

#[derive(Debug, Serialize)]
struct OracleRecord {
    max_relative_deviation: f64,
    tolerance: Option<f64>,
    resolution: usize,
}

fn oracle_check(a: &OracleArgs, curve: &CurveSpec, sink: &Sink, manifest: &Manifest) -> Result<(), CliError> {
    let params = fractional(a.alpha)?;
    check_taus(&a.taus)?;
    if a.eps.is_empty() {
        return Err(invalid("need at least one eps"));
    }
    if a.resolution < 2 {
        return Err(invalid("oracle resolution must be at least 2"));
    }
    if let Some(t) = a.tolerance {
        if !(t > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
    }
    let reach = validated_curve(curve, &a.tube)?;
    let molls = a
        .eps
        .iter()
        .map(|&e| check_epsilon(e, reach))
        .collect::<Result<Vec<_>, _>>()?;
    a.tube.spec().validate().map_err(invalid)?;
    let tube = TubeQuadrature::new(curve, params, frame(curve, &a.tube)?, a.tube.spec(), reach).map_err(invalid)?;
    let evaluator = KernelEvaluator::new(curve, params, QuadratureSpec::default()).map_err(invalid)?;
    sink.open(manifest)?;

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for m in &molls {
        for &tau in &a.taus {
            let t = tube.u_eps(tau, m).map_err(numerical)?;
            let o = u_eps_oracle_with(&evaluator, &curve.position(tau), m, a.resolution).map_err(numerical)?;
            let dev = (t - o).norm() / o.norm();
            worst = worst.max(dev);
            rows.push(vec![
                cell(m.epsilon),
                cell(tau),
                cell(t.x),
                cell(t.y),
                cell(t.z),
                cell(o.x),
                cell(o.y),
                cell(o.z),
                cell(dev),
            ]);
        }
    }
    sink.say(format_args!("max relative deviation: {worst}"));
    sink.table(
        "oracle.csv",
        &[
            "eps", "tau", "tubeX", "tubeY", "tubeZ", "oracleX", "oracleY", "oracleZ", "relDev",
        ],
        &rows,
    )?;
    sink.json(
        "oracle.json",
        &OracleRecord {
            max_relative_deviation: worst,
            tolerance: a.tolerance,
            resolution: a.resolution,
        },
    )?;
    match a.tolerance {
        Some(t) if !(worst <= t) => Err(numerical(format!(
            "max relative deviation {worst} exceeds tolerance {t}"
        ))),
        _ => Ok(()),
    }
}

/// Loads a manifest from an output directory.
pub fn read_manifest(dir: &Path) -> Result<Manifest, CliError> {
    io::read_json(&dir.join(MANIFEST_FILE)).map_err(invalid)
}
