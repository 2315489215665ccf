//! Unmollified velocity induced by a closed filament.
//!
//! The fractional kernel is `(x - y) x t / |x - y|^(3 - alpha)`; the
//! classical one uses exponent 3 and the prefactor `-1 / (4 pi)`. Line
//! integrals are evaluated with the periodic trapezoid rule away from the
//! curve and with Gauss-Legendre panels graded toward the nearest curve
//! parameter close to it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curve::CurveSpec;
use crate::math::{floor, powf, sqrt, wrap01};
use crate::quadrature::{dyadic_panels, levels_for, GaussLegendre};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Fractional,
    Classical,
}

/// How the vorticity measure weights the line element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirculationConvention {
    /// Integrand `gamma' |gamma'| d sigma`: depends on the parametrization.
    SpeedWeighted,
    /// Integrand `gamma' d sigma`: parametrization invariant.
    UnitCirculation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub alpha: f64,
    /// Kernel constant of the fractional law, fixed to 1 by default.
    pub c_alpha: f64,
    pub mode: KernelMode,
    pub convention: CirculationConvention,
}

impl KernelParams {
    pub fn fractional(alpha: f64) -> Result<Self> {
        let p = Self {
            alpha,
            c_alpha: 1.0,
            mode: KernelMode::Fractional,
            convention: CirculationConvention::SpeedWeighted,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn classical() -> Self {
        Self {
            alpha: 0.0,
            c_alpha: 1.0,
            mode: KernelMode::Classical,
            convention: CirculationConvention::SpeedWeighted,
        }
    }

    pub fn with_convention(mut self, convention: CirculationConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == KernelMode::Fractional && !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidParameter("alpha must lie in (0, 1/2)"));
        }
        if !self.c_alpha.is_finite() {
            return Err(Error::InvalidParameter("kernel constant must be finite"));
        }
        Ok(())
    }

    /// Power of the distance in the kernel denominator.
    pub fn exponent(&self) -> f64 {
        match self.mode {
            KernelMode::Fractional => 3.0 - self.alpha,
            KernelMode::Classical => 3.0,
        }
    }

    pub fn prefactor(&self) -> f64 {
        match self.mode {
            KernelMode::Fractional => self.c_alpha,
            KernelMode::Classical => -1.0 / (4.0 * PI),
        }
    }

    /// Weight of the line element given the speed `|gamma'|`.
    fn measure(&self, speed: f64) -> f64 {
        match self.convention {
            CirculationConvention::SpeedWeighted => speed,
            CirculationConvention::UnitCirculation => 1.0,
        }
    }
}

/// Hard floor on the evaluation distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinDistance {
    RelativeToDiameter(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Uniform trapezoid nodes; also sets the far-panel layout (16 nodes per panel).
    pub base_nodes: usize,
    /// Cap on dyadic refinement levels per side of the nearest parameter.
    pub graded_levels: usize,
    pub min_distance: MinDistance,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            base_nodes: 1024,
            graded_levels: 48,
            min_distance: MinDistance::RelativeToDiameter(1e-7),
        }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(base_nodes: usize) -> Self {
        Self {
            base_nodes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_nodes < 64 {
            return Err(Error::InvalidParameter("base_nodes must be at least 64"));
        }
        match self.min_distance {
            MinDistance::RelativeToDiameter(v) | MinDistance::Absolute(v) if v >= 0.0 => Ok(()),
            _ => Err(Error::InvalidParameter("min_distance must be non-negative")),
        }
    }
}

/// Precomputed point and weighted tangent of one quadrature node.
#[derive(Debug, Clone, Copy)]
struct Node {
    p: Vec3,
    wd: Vec3,
}

/// Panel rule width and the uniform-to-graded switch, in parameter units times `base_nodes`.
const PANEL_RULE: usize = 16;
const GRADED_RULE: usize = 10;
const FAR_THRESHOLD: f64 = 6.0;

/// Velocity evaluator with cached curve samples.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    curve: CurveSpec,
    params: KernelParams,
    spec: QuadratureSpec,
    min_distance: f64,
    uniform: Vec<Node>,
    panels: Vec<Node>,
    panel_count: usize,
    graded_rule: GaussLegendre,
}

impl KernelEvaluator {
    pub fn new(curve: &CurveSpec, params: KernelParams, spec: QuadratureSpec) -> Result<Self> {
        params.validate()?;
        spec.validate()?;
        let n = spec.base_nodes;
        let min_distance = match spec.min_distance {
            MinDistance::Absolute(v) => v,
            MinDistance::RelativeToDiameter(f) => f * curve.diameter(),
        };
        let node = |tau: f64, w: f64| -> Result<Node> {
            let (p, d) = curve.point_and_tangent(tau);
            let s = d.norm();
            if !(s > 0.0) {
                return Err(Error::VanishingTangent { tau });
            }
            Ok(Node {
                p,
                wd: d * (w * params.measure(s)),
            })
        };
        let h = 1.0 / n as f64;
        let uniform = (0..n).map(|i| node(i as f64 * h, h)).collect::<Result<Vec<_>>>()?;
        let panel_count = (n / PANEL_RULE).max(4);
        let rule = GaussLegendre::new(PANEL_RULE);
        let ph = 1.0 / panel_count as f64;
        let mut panels = Vec::with_capacity(panel_count * PANEL_RULE);
        for j in 0..panel_count {
            for (t, w) in rule.mapped(j as f64 * ph, (j + 1) as f64 * ph) {
                panels.push(node(t, w)?);
            }
        }
        Ok(Self {
            curve: curve.clone(),
            params,
            spec,
            min_distance,
            uniform,
            panels,
            panel_count,
            graded_rule: GaussLegendre::new(GRADED_RULE),
        })
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Absolute distance floor in effect.
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Nearest curve parameter to `x` and the distance to it.
    pub fn nearest(&self, x: &Vec3) -> (f64, f64) {
        let n = self.uniform.len();
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (i, node) in self.uniform.iter().enumerate() {
            let d2 = (x - node.p).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        let h = 1.0 / n as f64;
        let mut tau = best as f64 * h;
        let mut jet = [Vec3::zeros(); 3];
        for _ in 0..30 {
            self.curve.derivatives(tau, &mut jet);
            let diff = jet[0] - x;
            let f = diff.dot(&jet[1]);
            let df = jet[1].norm_squared() + diff.dot(&jet[2]);
            if !(df > 0.0) {
                break;
            }
            let step = (f / df).clamp(-h, h);
            tau -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let tau = wrap01(tau);
        let d = (self.curve.position(tau) - x).norm();
        if d <= sqrt(best_d2) {
            (tau, d)
        } else {
            (best as f64 * h, sqrt(best_d2))
        }
    }

    fn accumulate(&self, x: &Vec3, nodes: &[Node]) -> Vec3 {
        let mut acc = Vec3::zeros();
        match self.params.mode {
            KernelMode::Classical => {
                for n in nodes {
                    let d = x - n.p;
                    let r2 = d.norm_squared();
                    acc += d.cross(&n.wd) / (r2 * sqrt(r2));
                }
            }
            KernelMode::Fractional => {
                let half = -0.5 * self.params.exponent();
                for n in nodes {
                    let d = x - n.p;
                    acc += d.cross(&n.wd) * powf(d.norm_squared(), half);
                }
            }
        }
        acc
    }

    /// Velocity at `x`.
    pub fn velocity(&self, x: &Vec3) -> Result<Vec3> {
        let (tau, d) = self.nearest(x);
        if !(d > self.min_distance) {
            return Err(Error::TooCloseToCurve {
                distance: d,
                floor: self.min_distance,
            });
        }
        let speed = self.curve.speed(tau);
        let scale = d / speed;
        if scale * self.uniform.len() as f64 >= FAR_THRESHOLD {
            return Ok(self.accumulate(x, &self.uniform) * self.params.prefactor());
        }
        self.near_field(tau, scale).velocity(x)
    }

    /// Graded samples around parameter `center`, resolving parameter scales down to `scale`.
    ///
    /// The result evaluates the velocity at any point whose nearest curve
    /// parameter is `center` and whose distance is at least `scale * |gamma'(center)|`.
    pub fn near_field(&self, center: f64, scale: f64) -> NearField<'_> {
        let center = wrap01(center);
        let p = self.panel_count;
        let h = 1.0 / p as f64;
        let star = (floor(center * p as f64) as usize).min(p - 1);
        let lo = (star as f64 - 1.0) * h;
        let hi = (star as f64 + 2.0) * h;
        let mut window = Vec::new();
        for (len, sign) in [(center - lo, -1.0), (hi - center, 1.0)] {
            let levels = levels_for(len, 0.25 * scale, self.spec.graded_levels);
            for (a, b) in dyadic_panels(len, levels) {
                for (u, w) in self.graded_rule.mapped(a, b) {
                    let tau = center + sign * u;
                    let (pt, d) = self.curve.point_and_tangent(tau);
                    window.push(Node {
                        p: pt,
                        wd: d * (w * self.params.measure(d.norm())),
                    });
                }
            }
        }
        NearField {
            eval: self,
            skip: [(star + p - 1) % p, star, (star + 1) % p],
            window,
            anchor: self.curve.position(center),
        }
    }
}

/// Quadrature specialised to points near one curve parameter.
#[derive(Debug, Clone)]
pub struct NearField<'a> {
    eval: &'a KernelEvaluator,
    skip: [usize; 3],
    window: Vec<Node>,
    anchor: Vec3,
}

impl NearField<'_> {
    pub fn velocity(&self, x: &Vec3) -> Result<Vec3> {
        let floor = self.eval.min_distance;
        let d = (x - self.anchor).norm();
        if !(d > floor) {
            return Err(Error::TooCloseToCurve { distance: d, floor });
        }
        let mut acc = self.eval.accumulate(x, &self.window);
        for j in 0..self.eval.panel_count {
            if self.skip.contains(&j) {
                continue;
            }
            let nodes = &self.eval.panels[j * PANEL_RULE..(j + 1) * PANEL_RULE];
            acc += self.eval.accumulate(x, nodes);
        }
        Ok(acc * self.eval.params.prefactor())
    }
}

/// Fractional (or classical, per `params.mode`) velocity at `x`.
pub fn v_alpha(x: &Vec3, curve: &CurveSpec, params: KernelParams, quad: QuadratureSpec) -> Result<Vec3> {
    KernelEvaluator::new(curve, params, quad)?.velocity(x)
}

/// Classical Biot-Savart velocity at `x`.
pub fn classical_v(x: &Vec3, curve: &CurveSpec, quad: QuadratureSpec) -> Result<Vec3> {
    v_alpha(x, curve, KernelParams::classical(), quad)
}

/// Single integrand sample at curve parameter `sigma`, prefactor included.
pub fn kernel_integrand(x: &Vec3, sigma: f64, curve: &CurveSpec, params: &KernelParams) -> Result<Vec3> {
    let (p, d) = curve.point_and_tangent(sigma);
    let diff = x - p;
    let r2 = diff.norm_squared();
    let tol = f64::EPSILON * x.norm().max(p.norm()).max(1.0);
    if !(sqrt(r2) > tol) {
        return Err(Error::SingularPoint);
    }
    let weight = params.prefactor() * params.measure(d.norm()) * powf(r2, -0.5 * params.exponent());
    Ok(diff.cross(&d) * weight)
}
