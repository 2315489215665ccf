//! Mollified velocity on the filament.
//!
//! `u_eps(gamma(tau))` is the convolution of the kernel velocity with
//! `eta_eps = eps^-3 eta(x / eps)`. On the curve it is evaluated in tube
//! coordinates `Psi(s, y) = gamma(s) + y_1 n_1(s) + y_2 n_2(s)`: a midpoint
//! rule in `s`, Gauss-Legendre in a squared radial variable and the
//! trapezoid rule in angle. A brute-force Cartesian grid serves as oracle.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curve::{CurveSpec, DEFAULT_REACH_GRID};
use crate::frame::FrameField;
use crate::kernel::{KernelEvaluator, KernelParams, MinDistance, QuadratureSpec};
use crate::math::{exp, powf, sin_cos};
use crate::par::map_range;
use crate::quadrature::{dyadic_panels, integrate_composite, levels_for, GaussLegendre};
use crate::{Error, Result, Vec3};

/// Admissible fraction of the reach for the mollification scale.
pub const REACH_FRACTION: f64 = 0.9;

/// Radial profile of the mollifier on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `exp(-1 / (1 - r^2))`.
    Bump,
}

impl Profile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Bump => {
                if r >= 1.0 {
                    0.0
                } else {
                    exp(-1.0 / (1.0 - r * r))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub profile: Profile,
    /// Constant making the unit-scale mollifier integrate to one.
    pub normalization: f64,
    pub epsilon: f64,
}

impl MollifierSpec {
    pub fn bump(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        let profile = Profile::Bump;
        Ok(Self {
            profile,
            normalization: 1.0 / (4.0 * PI * radial_moment(profile)),
            epsilon,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        Ok(Self { epsilon, ..*self })
    }

    /// `eta_eps(z)`.
    pub fn density(&self, z: &Vec3) -> f64 {
        let e = self.epsilon;
        self.normalization * self.profile.eval(z.norm() / e) / (e * e * e)
    }

    /// `4 pi c int_0^1 eta(r) r^2 dr` under the production radial rule; one up to rounding.
    pub fn total_mass(&self) -> f64 {
        4.0 * PI * self.normalization * radial_moment(self.profile)
    }
}

fn radial_moment(profile: Profile) -> f64 {
    let rule = GaussLegendre::new(20);
    integrate_composite(&rule, 0.0, 1.0, 32, |r| profile.eval(r) * r * r)
}

/// Resolution of the tube-coordinate quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeQuadSpec {
    pub s_nodes: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Base nodes of the line quadrature used for the kernel inside the tube.
    pub line_nodes: usize,
}

impl Default for TubeQuadSpec {
    fn default() -> Self {
        Self {
            s_nodes: 64,
            radial_nodes: 32,
            angular_nodes: 16,
            line_nodes: 256,
        }
    }
}

impl TubeQuadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.s_nodes < 8 || self.radial_nodes < 8 || self.angular_nodes < 8 {
            return Err(Error::InvalidParameter(
                "tube quadrature resolutions must be at least 8",
            ));
        }
        if !self.angular_nodes.is_multiple_of(2) {
            return Err(Error::InvalidParameter("angular node count must be even"));
        }
        Ok(())
    }

    /// Every resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            s_nodes: self.s_nodes * factor,
            radial_nodes: self.radial_nodes * factor,
            angular_nodes: self.angular_nodes * factor,
            line_nodes: self.line_nodes * factor,
        }
    }
}

/// Which mollifier weight multiplies the leading expansion term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadingTermWeight {
    /// `eta_eps(gamma(tau) - gamma(s) - z)` with the exact tube Jacobian.
    Full,
    /// `eta_eps((tau - s) gamma'(s) - z) |gamma'(s)|`: odd in `z`, integrates to zero.
    Symmetric,
}

#[derive(Debug, Clone, Copy)]
enum Integrand {
    Velocity,
    Leading(LeadingTermWeight),
}

/// Tube-coordinate mollification prepared for one curve, kernel and frame.
#[derive(Debug, Clone)]
pub struct TubeQuadrature {
    evaluator: KernelEvaluator,
    frame: FrameField,
    quad: TubeQuadSpec,
    reach: f64,
    min_speed: f64,
    kappa_max: f64,
}

impl TubeQuadrature {
    /// `reach` is a lower bound on the security radius of `curve`.
    pub fn new(
        curve: &CurveSpec,
        params: KernelParams,
        frame: FrameField,
        quad: TubeQuadSpec,
        reach: f64,
    ) -> Result<Self> {
        quad.validate()?;
        if !(reach > 0.0) {
            return Err(Error::InvalidParameter("reach must be positive"));
        }
        let spec = QuadratureSpec {
            base_nodes: quad.line_nodes,
            graded_levels: 60,
            min_distance: MinDistance::RelativeToDiameter(1e-13),
        };
        let evaluator = KernelEvaluator::new(curve, params, spec)?;
        let n = (32 * curve.order()).max(2048);
        let mut min_speed = f64::INFINITY;
        let mut kappa_max: f64 = 0.0;
        for i in 0..n {
            let tau = i as f64 / n as f64;
            min_speed = min_speed.min(curve.speed(tau));
            kappa_max = kappa_max.max(curve.curvature(tau));
        }
        Ok(Self {
            evaluator,
            frame,
            quad,
            reach,
            min_speed,
            kappa_max,
        })
    }

    pub fn curve(&self) -> &CurveSpec {
        self.evaluator.curve()
    }

    pub fn params(&self) -> &KernelParams {
        self.evaluator.params()
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn spec(&self) -> &TubeQuadSpec {
        &self.quad
    }

    fn check_epsilon(&self, eps: f64) -> Result<()> {
        let bound = REACH_FRACTION * self.reach;
        if !(eps < bound) {
            return Err(Error::EpsilonTooLarge { epsilon: eps, bound });
        }
        Ok(())
    }

    /// `u_eps(gamma(tau))`.
    pub fn u_eps(&self, tau: f64, moll: &MollifierSpec) -> Result<Vec3> {
        self.integrate(tau, moll, Integrand::Velocity)
    }

    /// Mollified contribution of the leading expansion term `z x gamma'(s) / R^(3 - alpha)`.
    pub fn leading_term(&self, tau: f64, moll: &MollifierSpec, weight: LeadingTermWeight) -> Result<Vec3> {
        self.integrate(tau, moll, Integrand::Leading(weight))
    }

    fn integrate(&self, tau: f64, moll: &MollifierSpec, what: Integrand) -> Result<Vec3> {
        let eps = moll.epsilon;
        self.check_epsilon(eps)?;
        let curve = self.curve();
        let x0 = curve.position(tau);
        let half = (1.5 * eps / (self.min_speed * (1.0 - self.kappa_max * eps))).min(0.5);
        let ns = self.quad.s_nodes;
        let ds = 2.0 * half / ns as f64;
        let radial = GaussLegendre::new(self.quad.radial_nodes);
        let t_min = radial.nodes()[0] * 0.5 + 0.5;
        let r_min = eps * t_min * t_min;
        let nt = self.quad.angular_nodes;
        let angles: Vec<(f64, f64)> = (0..nt).map(|j| sin_cos(2.0 * PI * j as f64 / nt as f64)).collect();
        let dtheta = 2.0 * PI / nt as f64;

        let slices = map_range(ns, |i| -> Result<Vec3> {
            let s = tau - half + (i as f64 + 0.5) * ds;
            let mut jet = [Vec3::zeros(); 3];
            curve.derivatives(s, &mut jet);
            let speed = jet[1].norm();
            let dtan = jet[2] / speed - jet[1] * (jet[1].dot(&jet[2]) / (speed * speed * speed));
            let (n1, n2) = self.frame.at(s);
            let near = match what {
                Integrand::Velocity => Some(self.evaluator.near_field(s, r_min / speed)),
                Integrand::Leading(_) => None,
            };
            let profile = match what {
                Integrand::Leading(_) => Some(self.line_profile(s, speed, r_min)),
                Integrand::Velocity => None,
            };
            let mut acc = Vec3::zeros();
            for (t, wt) in radial.mapped(0.0, 1.0) {
                let r = eps * t * t;
                let area = wt * 2.0 * eps * t * r * dtheta * ds;
                for &(sn, cs) in &angles {
                    let y = (n1 * cs + n2 * sn) * r;
                    let (eta, jac) = match what {
                        Integrand::Leading(LeadingTermWeight::Symmetric) => {
                            (moll.density(&(jet[1] * (tau - s) - y)), speed)
                        }
                        _ => (moll.density(&(x0 - jet[0] - y)), speed - y.dot(&dtan)),
                    };
                    if eta == 0.0 {
                        continue;
                    }
                    let value = match (&near, &profile) {
                        (Some(nf), _) => nf.velocity(&(jet[0] + y))?,
                        (None, Some(p)) => y.cross(&jet[1]) * p.eval(r),
                        _ => unreachable!(),
                    };
                    acc += value * (eta * jac * area);
                }
            }
            Ok(acc)
        });
        let mut total = Vec3::zeros();
        for s in slices {
            total += s?;
        }
        Ok(match what {
            Integrand::Velocity => total,
            Integrand::Leading(_) => total * self.params().prefactor(),
        })
    }

    /// `G(r) = int |gamma'(s + sigma)| / (r^2 + |gamma'(s)|^2 sigma^2)^((3 - alpha) / 2) d sigma`.
    fn line_profile(&self, s: f64, speed: f64, r_min: f64) -> LineProfile {
        let curve = self.curve();
        let rule = GaussLegendre::new(10);
        let levels = levels_for(0.5, 0.25 * r_min / speed, 60);
        let mut nodes = Vec::new();
        for sign in [-1.0, 1.0] {
            for (a, b) in dyadic_panels(0.5, levels) {
                for (u, w) in rule.mapped(a, b) {
                    let sp = curve.speed(s + sign * u);
                    nodes.push((speed * speed * u * u, w * sp));
                }
            }
        }
        LineProfile {
            nodes,
            half_exponent: -0.5 * self.params().exponent(),
        }
    }
}

struct LineProfile {
    nodes: Vec<(f64, f64)>,
    half_exponent: f64,
}

impl LineProfile {
    fn eval(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.nodes
            .iter()
            .map(|(q, w)| w * powf(r2 + q, self.half_exponent))
            .sum()
    }
}

/// `u_eps(gamma(tau))` in tube coordinates; estimates the reach on the default grid.
pub fn u_eps(
    tau: f64,
    curve: &CurveSpec,
    params: KernelParams,
    moll: &MollifierSpec,
    frame: &FrameField,
    quad: TubeQuadSpec,
) -> Result<Vec3> {
    let reach = curve.security_radius(DEFAULT_REACH_GRID)?;
    TubeQuadrature::new(curve, params, frame.clone(), quad, reach)?.u_eps(tau, moll)
}

/// Residual of the mollified leading expansion term at `gamma(tau)`.
pub fn leading_term_contribution(
    tau: f64,
    curve: &CurveSpec,
    params: KernelParams,
    moll: &MollifierSpec,
    frame: &FrameField,
    quad: TubeQuadSpec,
) -> Result<Vec3> {
    let reach = curve.security_radius(DEFAULT_REACH_GRID)?;
    TubeQuadrature::new(curve, params, frame.clone(), quad, reach)?.leading_term(tau, moll, LeadingTermWeight::Full)
}

/// Subdivision depth of oracle cells lying within one cell width of the curve.
pub const ORACLE_REFINE_LEVELS: usize = 4;

/// Midpoint-rule convolution `int eta_eps(x - z) f(z) dz` over an `n^3` grid
/// covering the support ball, centred on `x`.
///
/// `f` returning `None` drops the cell.
pub fn grid_convolution<F>(x: &Vec3, moll: &MollifierSpec, n: usize, f: F) -> Result<Vec3>
where
    F: Fn(&Vec3) -> Result<Option<Vec3>> + Sync + Send,
{
    refined_grid_convolution(x, moll, n, 0, |_, _| false, f)
}

/// As [`grid_convolution`], splitting a cell of width `h` centred at `z` into
/// eight halves, up to `levels` times, while `near(z, h)` holds.
pub fn refined_grid_convolution<N, F>(
    x: &Vec3,
    moll: &MollifierSpec,
    n: usize,
    levels: usize,
    near: N,
    f: F,
) -> Result<Vec3>
where
    N: Fn(&Vec3, f64) -> bool + Sync + Send,
    F: Fn(&Vec3) -> Result<Option<Vec3>> + Sync + Send,
{
    if n < 2 {
        return Err(Error::InvalidParameter("grid resolution must be at least 2"));
    }
    let eps = moll.epsilon;
    let h = 2.0 * eps / n as f64;
    let offset = 0.5 * (n as f64 - 1.0);
    let cells = Cells {
        x,
        moll,
        near: &near,
        f: &f,
    };
    let slabs = map_range(n, |i| -> Result<Vec3> {
        let dx = (i as f64 - offset) * h;
        let mut acc = Vec3::zeros();
        for j in 0..n {
            let dy = (j as f64 - offset) * h;
            for k in 0..n {
                let dz = (k as f64 - offset) * h;
                cells.add(Vec3::new(dx, dy, dz), h, levels, &mut acc)?;
            }
        }
        Ok(acc)
    });
    let mut total = Vec3::zeros();
    for s in slabs {
        total += s?;
    }
    Ok(total)
}

struct Cells<'a, N, F> {
    x: &'a Vec3,
    moll: &'a MollifierSpec,
    near: &'a N,
    f: &'a F,
}

impl<N, F> Cells<'_, N, F>
where
    N: Fn(&Vec3, f64) -> bool,
    F: Fn(&Vec3) -> Result<Option<Vec3>>,
{
    fn add(&self, d: Vec3, h: f64, levels: usize, acc: &mut Vec3) -> Result<()> {
        let z = self.x + d;
        // cells entirely outside the support are skipped before refinement
        if d.norm() > self.moll.epsilon + h {
            return Ok(());
        }
        if levels > 0 && (self.near)(&z, h) {
            let q = 0.25 * h;
            for sx in [-q, q] {
                for sy in [-q, q] {
                    for sz in [-q, q] {
                        self.add(d + Vec3::new(sx, sy, sz), 0.5 * h, levels - 1, acc)?;
                    }
                }
            }
            return Ok(());
        }
        let eta = self.moll.density(&d);
        if eta == 0.0 {
            return Ok(());
        }
        if let Some(v) = (self.f)(&z)? {
            *acc += v * (eta * h * h * h);
        }
        Ok(())
    }
}

/// Cartesian-grid oracle for `u_eps(x)` using a prepared evaluator.
///
/// Cells the curve passes within one width of are subdivided
/// [`ORACLE_REFINE_LEVELS`] times; cells closer to the curve than the
/// evaluator's distance floor are skipped.
pub fn u_eps_oracle_with(
    evaluator: &KernelEvaluator,
    x: &Vec3,
    moll: &MollifierSpec,
    resolution: usize,
) -> Result<Vec3> {
    refined_grid_convolution(
        x,
        moll,
        resolution,
        ORACLE_REFINE_LEVELS,
        |z, h| evaluator.nearest(z).1 < h,
        |z| match evaluator.velocity(z) {
            Ok(v) => Ok(Some(v)),
            Err(Error::TooCloseToCurve { .. }) => Ok(None),
            Err(e) => Err(e),
        },
    )
}

/// Cartesian-grid oracle for `u_eps(x)` with default line quadrature.
pub fn u_eps_oracle(
    x: &Vec3,
    curve: &CurveSpec,
    params: KernelParams,
    moll: &MollifierSpec,
    resolution: usize,
) -> Result<Vec3> {
    let reach = curve.security_radius(DEFAULT_REACH_GRID)?;
    let bound = REACH_FRACTION * reach;
    if !(moll.epsilon < bound) {
        return Err(Error::EpsilonTooLarge {
            epsilon: moll.epsilon,
            bound,
        });
    }
    let ev = KernelEvaluator::new(curve, params, QuadratureSpec::default())?;
    u_eps_oracle_with(&ev, x, moll, resolution)
}
