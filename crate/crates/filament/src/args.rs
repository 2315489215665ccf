//! Command-line arguments. Every command's arguments are also its manifest record.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filament_core::mollify::TubeQuadSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "filament", version, about = "Fractional vortex filament experiments")]
pub struct Cli {
    /// Worker threads (default: available cores). FILAMENT_THREADS overrides this flag.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Velocity at points or curve parameters, raw or mollified.
    Velocity(VelocityArgs),
    /// Scale sweep and extrapolation at fixed alpha.
    SweepEps(SweepEpsArgs),
    /// Scale sweeps over an (alpha, tau) table with band statistics.
    SweepAlpha(SweepAlphaArgs),
    /// Log regression of the classical mollified binormal velocity.
    ClassicalLog(ClassicalLogArgs),
    /// Time evolution of the filament.
    Evolve(EvolveArgs),
    /// Decay order of the local expansion remainder.
    ExpansionCheck(ExpansionArgs),
    /// Tube quadrature against the Cartesian grid oracle.
    OracleCheck(OracleArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    Fractional,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMode {
    Mollified,
    Classical,
    Limiting,
}

/// Curve input and output directory shared by all commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IoArgs {
    /// Curve JSON file.
    #[arg(long)]
    pub curve: PathBuf,
    /// Output directory; tables go to stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Keep the input parametrization instead of refitting at constant speed.
    #[arg(long)]
    pub keep_parametrization: bool,
    /// Series order of the constant-speed refit.
    #[arg(long, default_value_t = 48)]
    pub arc_length_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct TubeArgs {
    #[arg(long, default_value_t = 64)]
    pub s_nodes: usize,
    #[arg(long, default_value_t = 32)]
    pub radial_nodes: usize,
    #[arg(long, default_value_t = 16)]
    pub angular_nodes: usize,
    #[arg(long, default_value_t = 256)]
    pub line_nodes: usize,
    #[arg(long, default_value_t = 256)]
    pub frame_samples: usize,
    #[arg(long, default_value_t = 8192)]
    pub reach_grid: usize,
}

impl TubeArgs {
    pub fn spec(&self) -> TubeQuadSpec {
        TubeQuadSpec {
            s_nodes: self.s_nodes,
            radial_nodes: self.radial_nodes,
            angular_nodes: self.angular_nodes,
            line_nodes: self.line_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VelocityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = KernelChoice::Fractional)]
    pub mode: KernelChoice,
    /// Mollification scale; omit for the raw field.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Point `x,y,z`; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Tensor grid `x0:x1:nx,y0:y1:ny,z0:z1:nz`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Curve parameter; repeatable. Needs `--eps`.
    #[arg(long = "tau")]
    pub taus: Vec<f64>,
    /// Base nodes of the line quadrature.
    #[arg(long, default_value_t = 1024)]
    pub quad_nodes: usize,
    /// Grid cells per axis for mollified off-curve points.
    #[arg(long, default_value_t = 48)]
    pub oracle_resolution: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub tube: TubeArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepEpsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long = "tau", value_delimiter = ',', default_value = "0")]
    pub taus: Vec<f64>,
    /// Decreasing geometric scales.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub tube: TubeArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepAlphaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long = "alpha", value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3,0.45")]
    pub alphas: Vec<f64>,
    /// Explicit parameters; overrides `--tau-count`.
    #[arg(long = "tau", value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Equispaced parameters `i / n`.
    #[arg(long, default_value_t = 8)]
    pub tau_count: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.08,0.04,0.02,0.01")]
    pub eps: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub tube: TubeArgs,
}

impl SweepAlphaArgs {
    pub fn tau_list(&self) -> Vec<f64> {
        if self.taus.is_empty() {
            (0..self.tau_count).map(|i| i as f64 / self.tau_count as f64).collect()
        } else {
            self.taus.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassicalLogArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.08,0.04,0.02,0.01,0.005")]
    pub eps: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub tube: TubeArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value_t = EvolveMode::Limiting)]
    pub mode: EvolveMode,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    /// Mollification scale of the mollified and classical modes.
    #[arg(long, default_value_t = 0.02)]
    pub eps: f64,
    /// Limiting-law coefficient: `per-step`, `initial` or a number.
    #[arg(long, default_value = "per-step", allow_hyphen_values = true)]
    pub coefficient: String,
    /// Scales used to extrapolate the limiting-law coefficient.
    #[arg(long, value_delimiter = ',', default_value = "0.08,0.04,0.02,0.01")]
    pub sweep_eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value_t = 16)]
    pub refit_order: usize,
    /// Diagnostics cadence in steps.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Keep the parametrization produced by the refit.
    #[arg(long)]
    pub no_reparametrize: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub tube: TubeArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExpansionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    /// Decreasing approach distances.
    #[arg(long, value_delimiter = ',', default_value = "0.002,0.001,0.0005,0.00025,0.000125")]
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    pub eps: Vec<f64>,
    #[arg(long = "tau", value_delimiter = ',', default_value = "0")]
    pub taus: Vec<f64>,
    /// Grid cells per axis of the oracle.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Exit with the numerical status when the deviation exceeds this.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub tube: TubeArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

impl Command {
    pub fn io(&self) -> Option<&IoArgs> {
        match self {
            Command::Velocity(a) => Some(&a.io),
            Command::SweepEps(a) => Some(&a.io),
            Command::SweepAlpha(a) => Some(&a.io),
            Command::ClassicalLog(a) => Some(&a.io),
            Command::Evolve(a) => Some(&a.io),
            Command::ExpansionCheck(a) => Some(&a.io),
            Command::OracleCheck(a) => Some(&a.io),
            Command::Replay(_) => None,
        }
    }

    pub fn io_mut(&mut self) -> Option<&mut IoArgs> {
        match self {
            Command::Velocity(a) => Some(&mut a.io),
            Command::SweepEps(a) => Some(&mut a.io),
            Command::SweepAlpha(a) => Some(&mut a.io),
            Command::ClassicalLog(a) => Some(&mut a.io),
            Command::Evolve(a) => Some(&mut a.io),
            Command::ExpansionCheck(a) => Some(&mut a.io),
            Command::OracleCheck(a) => Some(&mut a.io),
            Command::Replay(_) => None,
        }
    }
}
