//! Time stepping of a closed filament.
//!
//! Markers `gamma(i / n)` are advanced with classical RK4. Each stage refits
//! the markers to a trigonometric curve and evaluates the velocity on it.
//! After every step the curve is refit and, optionally, reparametrized by
//! arc length with the marker at `tau = 0` kept in place.

use alloc::vec::Vec;

use crate::asymptotics::eps_sweep;
use crate::curve::{fit_fourier, CurveSpec};
use crate::frame::FrameField;
use crate::kernel::KernelParams;
use crate::mollify::{MollifierSpec, TubeQuadSpec, TubeQuadrature, REACH_FRACTION};
use crate::{Error, Result, Vec3};

/// Where the binormal coefficient of the limiting law comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientSource {
    /// Extrapolated at every node for every stage.
    PerStep,
    /// Extrapolated once per node from the initial curve, then frozen. Approximate.
    Initial,
    /// A fixed value at every node.
    Given(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityMode {
    Mollified {
        alpha: f64,
        epsilon: f64,
    },
    Classical {
        epsilon: f64,
    },
    /// `(C / alpha) kappa B`.
    LimitingLaw {
        alpha: f64,
        coefficient: CoefficientSource,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mode: VelocityMode,
    pub dt: f64,
    pub steps: usize,
    pub nodes: usize,
    pub refit_order: usize,
    /// Diagnostics every this many steps (0 disables them after the initial state).
    pub diagnostics_every: usize,
    pub reparametrize: bool,
    pub tube: TubeQuadSpec,
    pub frame_samples: usize,
    pub reach_grid: usize,
    /// Scales used when the limiting-law coefficient is extrapolated.
    pub sweep_epsilons: Vec<f64>,
}

impl SimConfig {
    pub fn new(mode: VelocityMode, dt: f64, steps: usize) -> Self {
        Self {
            mode,
            dt,
            steps,
            nodes: 64,
            refit_order: 16,
            diagnostics_every: 1,
            reparametrize: true,
            tube: TubeQuadSpec::default(),
            frame_samples: 256,
            reach_grid: 2048,
            sweep_epsilons: alloc::vec![0.08, 0.04, 0.02, 0.01],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        if self.refit_order == 0 {
            return Err(Error::InvalidParameter("refit order must be positive"));
        }
        if self.nodes < 2 * self.refit_order + 1 {
            return Err(Error::InsufficientNodes {
                needed: 2 * self.refit_order + 1,
                got: self.nodes,
            });
        }
        match self.mode {
            VelocityMode::Mollified { alpha, epsilon } => {
                KernelParams::fractional(alpha)?;
                MollifierSpec::bump(epsilon)?;
            }
            VelocityMode::Classical { epsilon } => {
                MollifierSpec::bump(epsilon)?;
            }
            VelocityMode::LimitingLaw { alpha, coefficient } => {
                KernelParams::fractional(alpha)?;
                if let CoefficientSource::Given(c) = coefficient {
                    if !c.is_finite() {
                        return Err(Error::InvalidParameter("coefficient must be finite"));
                    }
                } else {
                    crate::asymptotics::validate_epsilons(&self.sweep_epsilons)?;
                }
            }
        }
        self.tube.validate()
    }
}

/// Per-snapshot geometric diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub step: usize,
    pub time: f64,
    pub length: f64,
    pub kappa_max: f64,
    pub kappa_min: f64,
    /// Smallest doubly-critical self-distance; infinite when none is found.
    pub self_distance: f64,
    pub center: Vec3,
}

impl Diagnostics {
    pub fn measure(curve: &CurveSpec, step: usize, time: f64, reach_grid: usize) -> Result<Self> {
        let n = 1024;
        let mut kappa_max: f64 = 0.0;
        let mut kappa_min = f64::INFINITY;
        for i in 0..n {
            let k = curve.curvature(i as f64 / n as f64);
            kappa_max = kappa_max.max(k);
            kappa_min = kappa_min.min(k);
        }
        let reach = curve.reach(reach_grid)?;
        Ok(Self {
            step,
            time,
            length: curve.length(),
            kappa_max,
            kappa_min,
            self_distance: reach.bottleneck.unwrap_or(f64::INFINITY),
            center: curve.center_of_mass(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub curve: CurveSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostics>,
    /// Error that stopped the run; the last snapshot is the last valid state.
    pub halted: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory always holds the initial state")
    }
}

/// Stateful stepper; holds the frozen coefficients of [`CoefficientSource::Initial`].
#[derive(Debug, Clone)]
pub struct Evolver {
    cfg: SimConfig,
    frozen: Option<Vec<f64>>,
}

fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

impl Evolver {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, frozen: None })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Velocity of the selected law at `taus` on `curve`.
    pub fn velocity(&mut self, curve: &CurveSpec, taus: &[f64]) -> Result<Vec<Vec3>> {
        let cfg = &self.cfg;
        match cfg.mode {
            VelocityMode::Mollified { alpha, epsilon } => {
                let tube = self.tube(curve, KernelParams::fractional(alpha)?, epsilon)?;
                let m = MollifierSpec::bump(epsilon)?;
                taus.iter().map(|&t| tube.u_eps(t, &m)).collect()
            }
            VelocityMode::Classical { epsilon } => {
                let tube = self.tube(curve, KernelParams::classical(), epsilon)?;
                let m = MollifierSpec::bump(epsilon)?;
                taus.iter().map(|&t| tube.u_eps(t, &m)).collect()
            }
            VelocityMode::LimitingLaw { alpha, coefficient } => {
                let coeffs = match coefficient {
                    CoefficientSource::Given(c) => alloc::vec![c; taus.len()],
                    CoefficientSource::PerStep => self.extract(curve, alpha, taus)?,
                    CoefficientSource::Initial => match &self.frozen {
                        Some(c) if c.len() == taus.len() => c.clone(),
                        _ => {
                            let c = self.extract(curve, alpha, taus)?;
                            self.frozen = Some(c.clone());
                            c
                        }
                    },
                };
                taus.iter()
                    .zip(coeffs)
                    .map(|(&t, c)| {
                        let f = curve.frenet(t)?;
                        Ok(f.binormal * (c / alpha * f.curvature))
                    })
                    .collect()
            }
        }
    }

    fn tube(&self, curve: &CurveSpec, params: KernelParams, epsilon: f64) -> Result<TubeQuadrature> {
        let reach = curve.security_radius(self.cfg.reach_grid)?;
        if !(epsilon < REACH_FRACTION * reach) {
            return Err(Error::SecurityRadiusViolated { epsilon, radius: reach });
        }
        let frame = FrameField::new(curve, self.cfg.frame_samples)?;
        TubeQuadrature::new(curve, params, frame, self.cfg.tube, reach)
    }

    fn extract(&self, curve: &CurveSpec, alpha: f64, taus: &[f64]) -> Result<Vec<f64>> {
        let eps = &self.cfg.sweep_epsilons;
        let tube = self.tube(curve, KernelParams::fractional(alpha)?, eps[0])?;
        let m = MollifierSpec::bump(eps[0])?;
        taus.iter()
            .map(|&t| eps_sweep(&tube, t, &m, eps).map(|r| r.c_hat))
            .collect()
    }

    /// One RK4 step of the configured law.
    pub fn step(&mut self, curve: &CurveSpec) -> Result<CurveSpec> {
        let cfg = self.cfg.clone();
        step_with_field(curve, &cfg, |c, taus| self.velocity(c, taus))
    }

    /// Runs `cfg.steps` steps, collecting snapshots and diagnostics.
    pub fn run(&mut self, curve: &CurveSpec) -> Result<Trajectory> {
        let cfg = self.cfg.clone();
        let mut traj = Trajectory {
            snapshots: alloc::vec![Snapshot {
                step: 0,
                time: 0.0,
                curve: curve.clone(),
            }],
            diagnostics: alloc::vec![Diagnostics::measure(curve, 0, 0.0, cfg.reach_grid)?],
            halted: None,
        };
        let mut current = curve.clone();
        for k in 1..=cfg.steps {
            let time = k as f64 * cfg.dt;
            let next = match self.step(&current) {
                Ok(c) => c,
                Err(e) => {
                    traj.halted = Some(e);
                    break;
                }
            };
            current = next;
            traj.snapshots.push(Snapshot {
                step: k,
                time,
                curve: current.clone(),
            });
            if cfg.diagnostics_every > 0 && k % cfg.diagnostics_every == 0 {
                match Diagnostics::measure(&current, k, time, cfg.reach_grid) {
                    Ok(d) => traj.diagnostics.push(d),
                    Err(e) => {
                        traj.halted = Some(e);
                        break;
                    }
                }
            }
        }
        Ok(traj)
    }
}

/// One RK4 step with the velocity supplied by `field(curve, taus)`.
pub fn step_with_field<F>(curve: &CurveSpec, cfg: &SimConfig, mut field: F) -> Result<CurveSpec>
where
    F: FnMut(&CurveSpec, &[f64]) -> Result<Vec<Vec3>>,
{
    let k = cfg.refit_order;
    let taus = nodes(cfg.nodes);
    let x0: Vec<Vec3> = taus.iter().map(|&t| curve.position(t)).collect();
    let mut stage = |x: &[Vec3]| -> Result<Vec<Vec3>> {
        let c = fit_fourier(x, k)?;
        field(&c, &taus)
    };
    let shift = |x: &[Vec3], v: &[Vec3], h: f64| -> Vec<Vec3> { x.iter().zip(v).map(|(a, b)| a + b * h).collect() };
    let dt = cfg.dt;
    let k1 = stage(&x0)?;
    let k2 = stage(&shift(&x0, &k1, 0.5 * dt))?;
    let k3 = stage(&shift(&x0, &k2, 0.5 * dt))?;
    let k4 = stage(&shift(&x0, &k3, dt))?;
    let x1: Vec<Vec3> = (0..x0.len())
        .map(|i| x0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
        .collect();
    let mut next = fit_fourier(&x1, k)?;
    if cfg.reparametrize {
        next = next.reparametrize_by_arc_length(k, 4096)?;
    }
    next.validate(1024)?;
    Ok(next)
}

/// One step of the configured law.
pub fn step(curve: &CurveSpec, cfg: &SimConfig) -> Result<CurveSpec> {
    Evolver::new(cfg.clone())?.step(curve)
}

/// A full run of the configured law.
pub fn run(curve: &CurveSpec, cfg: &SimConfig) -> Result<Trajectory> {
    Evolver::new(cfg.clone())?.run(curve)
}
