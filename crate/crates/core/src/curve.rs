//! Closed curves as truncated trigonometric series.
//!
//! `gamma(tau) = a_0 + sum_k [a_k cos(2 pi k tau) + b_k sin(2 pi k tau)]` on
//! the torus `R / Z`. Derivatives of every order are exact term-wise.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Matrix3;

use crate::math::{sin_cos, sqrt, wrap01};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result, Vec3};

const TWO_PI: f64 = 2.0 * PI;

/// Grid used for the reach estimate unless a caller asks otherwise.
pub const DEFAULT_REACH_GRID: usize = 8192;

/// Relative size `|gamma' x gamma''| / |gamma'|^2` below which the binormal
/// is treated as undefined.
pub const DEGENERATE_CURVATURE_TOL: f64 = 1e-10;

/// Closed curve given by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    cos: Vec<Vec3>,
    sin: Vec<Vec3>,
}

/// Frenet data at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetData {
    pub position: Vec3,
    pub speed: f64,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
    pub curvature: f64,
    pub torsion: f64,
}

/// Result of the reach estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachEstimate {
    /// `min(curvature_radius, bottleneck / 2)`.
    pub radius: f64,
    /// `1 / max kappa` over the grid.
    pub curvature_radius: f64,
    /// Smallest distance between doubly-critical pairs, if any was found.
    pub bottleneck: Option<f64>,
}

impl CurveSpec {
    /// `cos` holds `a_0..=a_K`, `sin` holds `b_1..=b_K`.
    pub fn new(cos: Vec<Vec3>, sin: Vec<Vec3>) -> Result<Self> {
        if sin.is_empty() {
            return Err(Error::MalformedCurve("truncation order must be positive"));
        }
        if cos.len() != sin.len() + 1 {
            return Err(Error::MalformedCurve(
                "cosine list must have exactly one more entry than the sine list",
            ));
        }
        if cos.iter().chain(&sin).any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::MalformedCurve("coefficients must be finite"));
        }
        Ok(Self { cos, sin })
    }

    /// Circle of radius `r` in the xy-plane, counterclockwise, `gamma(0) = (r, 0, 0)`.
    pub fn circle(r: f64) -> Self {
        Self::ellipse(r, r)
    }

    /// Ellipse with `a_1 = (a, 0, 0)` and `b_1 = (0, b, 0)`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        Self {
            cos: alloc::vec![Vec3::zeros(), Vec3::new(a, 0.0, 0.0)],
            sin: alloc::vec![Vec3::new(0.0, b, 0.0)],
        }
    }

    /// Trefoil knot `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)`, `t = 2 pi tau`.
    pub fn trefoil() -> Self {
        Self {
            cos: alloc::vec![
                Vec3::zeros(),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, -2.0, 0.0),
                Vec3::zeros(),
            ],
            sin: alloc::vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(0.0, 0.0, -1.0),
            ],
        }
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.sin.len()
    }

    pub fn cos_coeffs(&self) -> &[Vec3] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[Vec3] {
        &self.sin
    }

    /// Fills `out[m]` with the `m`-th derivative at `tau` for `m < out.len() <= 5`.
    pub fn derivatives(&self, tau: f64, out: &mut [Vec3]) {
        let n = out.len();
        assert!((1..=5).contains(&n), "derivative order above 4 is not supported");
        for o in out.iter_mut() {
            *o = Vec3::zeros();
        }
        out[0] = self.cos[0];
        let (s1, c1) = sin_cos(TWO_PI * wrap01(tau));
        let (mut ck, mut sk) = (1.0, 0.0);
        for k in 1..=self.order() {
            let (c, s) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
            ck = c;
            sk = s;
            let a = &self.cos[k];
            let b = &self.sin[k - 1];
            let even = a * ck + b * sk;
            out[0] += even;
            if n > 1 {
                let w = TWO_PI * k as f64;
                let odd = b * ck - a * sk;
                out[1] += odd * w;
                if n > 2 {
                    let w2 = w * w;
                    out[2] -= even * w2;
                    if n > 3 {
                        out[3] -= odd * (w2 * w);
                        if n > 4 {
                            out[4] += even * (w2 * w2);
                        }
                    }
                }
            }
        }
    }

    /// Derivative of the given order (0..=4) at `tau`.
    pub fn eval(&self, tau: f64, order: usize) -> Vec3 {
        let mut out = [Vec3::zeros(); 5];
        self.derivatives(tau, &mut out[..=order]);
        out[order]
    }

    pub fn position(&self, tau: f64) -> Vec3 {
        self.eval(tau, 0)
    }

    /// Position and first derivative.
    pub fn point_and_tangent(&self, tau: f64) -> (Vec3, Vec3) {
        let mut out = [Vec3::zeros(); 2];
        self.derivatives(tau, &mut out);
        (out[0], out[1])
    }

    pub fn speed(&self, tau: f64) -> f64 {
        self.eval(tau, 1).norm()
    }

    /// Frenet frame, curvature and torsion at `tau`.
    pub fn frenet(&self, tau: f64) -> Result<FrenetData> {
        let mut d = [Vec3::zeros(); 4];
        self.derivatives(tau, &mut d);
        let speed = d[1].norm();
        if !(speed > 0.0) {
            return Err(Error::VanishingTangent { tau });
        }
        let cross = d[1].cross(&d[2]);
        let cn = cross.norm();
        if !(cn > DEGENERATE_CURVATURE_TOL * speed * speed) {
            return Err(Error::DegenerateCurvature { tau });
        }
        let tangent = d[1] / speed;
        let binormal = cross / cn;
        let normal = binormal.cross(&tangent);
        Ok(FrenetData {
            position: d[0],
            speed,
            tangent,
            normal,
            binormal,
            curvature: cn / (speed * speed * speed),
            torsion: cross.dot(&d[3]) / (cn * cn),
        })
    }

    /// Curvature `|gamma' x gamma''| / |gamma'|^3`; zero where the binormal degenerates.
    pub fn curvature(&self, tau: f64) -> f64 {
        let mut d = [Vec3::zeros(); 3];
        self.derivatives(tau, &mut d);
        let s = d[1].norm();
        d[1].cross(&d[2]).norm() / (s * s * s)
    }

    /// Uniform samples `gamma(i / n)`.
    pub fn sample(&self, n: usize) -> Vec<Vec3> {
        (0..n).map(|i| self.position(i as f64 / n as f64)).collect()
    }

    /// Curve length by the periodic trapezoid rule.
    pub fn length(&self) -> f64 {
        let n = (16 * self.order()).max(1024);
        (0..n).map(|i| self.speed(i as f64 / n as f64)).sum::<f64>() / n as f64
    }

    /// Largest pairwise distance over a 256-point sample.
    pub fn diameter(&self) -> f64 {
        let pts = self.sample(256);
        let mut d2: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d2 = d2.max((pts[i] - pts[j]).norm_squared());
            }
        }
        sqrt(d2)
    }

    /// Arc-length weighted centroid.
    pub fn center_of_mass(&self) -> Vec3 {
        let n = (16 * self.order()).max(1024);
        let mut c = Vec3::zeros();
        let mut l = 0.0;
        for i in 0..n {
            let (p, t) = self.point_and_tangent(i as f64 / n as f64);
            let s = t.norm();
            c += p * s;
            l += s;
        }
        c / l
    }

    /// Reparametrization `sigma -> gamma(tau0 + sigma) - gamma(tau0)`.
    pub fn shifted(&self, tau0: f64) -> Self {
        let origin = self.position(tau0);
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos[0] -= origin;
        for k in 1..=self.order() {
            let (s, c) = sin_cos(TWO_PI * wrap01(k as f64 * wrap01(tau0)));
            let a = self.cos[k];
            let b = self.sin[k - 1];
            cos[k] = a * c + b * s;
            sin[k - 1] = b * c - a * s;
        }
        Self { cos, sin }
    }

    /// Orientation reversal `tau -> -tau`.
    pub fn reversed(&self) -> Self {
        Self {
            cos: self.cos.clone(),
            sin: self.sin.iter().map(|b| -b).collect(),
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            cos: self.cos.iter().map(|a| a * lambda).collect(),
            sin: self.sin.iter().map(|b| b * lambda).collect(),
        }
    }

    pub fn translated(&self, by: Vec3) -> Self {
        let mut out = self.clone();
        out.cos[0] += by;
        out
    }

    /// Applies a linear map (typically a rotation) to the curve.
    pub fn transformed(&self, m: &Matrix3<f64>) -> Self {
        Self {
            cos: self.cos.iter().map(|a| m * a).collect(),
            sin: self.sin.iter().map(|b| m * b).collect(),
        }
    }

    /// Checks non-vanishing tangent and simplicity on a `grid`-point sample.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let grid = grid.max(1024);
        let mut pts = Vec::with_capacity(grid);
        let mut min_speed = f64::INFINITY;
        for i in 0..grid {
            let tau = i as f64 / grid as f64;
            let (p, t) = self.point_and_tangent(tau);
            let s = t.norm();
            if !(s > 0.0) {
                return Err(Error::VanishingTangent { tau });
            }
            min_speed = min_speed.min(s);
            pts.push(p);
        }
        let tol = 1e-3 * min_speed;
        for i in 0..grid {
            for j in (i + 2)..grid {
                let gap = (j - i).min(grid + i - j);
                if gap < 2 {
                    continue;
                }
                let ratio = (pts[i] - pts[j]).norm() / (gap as f64 / grid as f64);
                if ratio < tol {
                    return Err(Error::NonSimpleCurve {
                        distance: (pts[i] - pts[j]).norm(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Lower estimate of the reach (security radius).
    pub fn security_radius(&self, grid: usize) -> Result<f64> {
        Ok(self.reach(grid)?.radius)
    }

    /// Reach estimate: `min(1 / max kappa, bottleneck / 2)`.
    ///
    /// Doubly-critical pairs are grid cells where both
    /// `(gamma_i - gamma_j) . gamma'_i` and `(gamma_i - gamma_j) . gamma'_j`
    /// change sign. Only pairs whose parameter gap allows the tangent to turn
    /// by `pi` at the maximal curvature are searched.
    pub fn reach(&self, grid: usize) -> Result<ReachEstimate> {
        let n = grid.max(64);
        let mut p = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut kappa_max: f64 = 0.0;
        let mut speed_max: f64 = 0.0;
        for i in 0..n {
            let tau = i as f64 / n as f64;
            let mut jet = [Vec3::zeros(); 3];
            self.derivatives(tau, &mut jet);
            let s = jet[1].norm();
            if !(s > 0.0) {
                return Err(Error::VanishingTangent { tau });
            }
            kappa_max = kappa_max.max(jet[1].cross(&jet[2]).norm() / (s * s * s));
            speed_max = speed_max.max(s);
            p.push(jet[0]);
            d.push(jet[1]);
        }
        let curvature_radius = 1.0 / kappa_max;
        let min_gap = ((0.9 * n as f64 * PI / (kappa_max * speed_max)) as usize).max(2);

        let mut best = f64::INFINITY;
        if 2 * min_gap + 1 < n {
            let row = |i: usize, f: &mut [f64], g: &mut [f64]| {
                for j in 0..n {
                    let diff = p[i] - p[j];
                    f[j] = diff.dot(&d[i]);
                    g[j] = diff.dot(&d[j]);
                }
            };
            let mut f0 = alloc::vec![0.0; n];
            let mut g0 = alloc::vec![0.0; n];
            let mut f1 = alloc::vec![0.0; n];
            let mut g1 = alloc::vec![0.0; n];
            row(0, &mut f0, &mut g0);
            for i in 0..n {
                let i1 = (i + 1) % n;
                row(i1, &mut f1, &mut g1);
                for off in min_gap..(n - min_gap) {
                    let j = (i + off) % n;
                    let j1 = (j + 1) % n;
                    let fs = [f0[j], f0[j1], f1[j], f1[j1]];
                    let gs = [g0[j], g0[j1], g1[j], g1[j1]];
                    if !straddles(&fs) || !straddles(&gs) {
                        continue;
                    }
                    for (a, b) in [(i, j), (i, j1), (i1, j), (i1, j1)] {
                        best = best.min((p[a] - p[b]).norm());
                    }
                }
                core::mem::swap(&mut f0, &mut f1);
                core::mem::swap(&mut g0, &mut g1);
            }
        }
        let bottleneck = best.is_finite().then_some(best);
        if let Some(b) = bottleneck {
            if b < 4.0 * speed_max / n as f64 {
                return Err(Error::NonSimpleCurve { distance: b });
            }
        }
        let radius = match bottleneck {
            Some(b) => curvature_radius.min(0.5 * b),
            None => curvature_radius,
        };
        Ok(ReachEstimate {
            radius,
            curvature_radius,
            bottleneck,
        })
    }

    /// Reparametrizes by arc length (starting point kept at `tau = 0`) and
    /// refits with `order` terms from `samples` nodes.
    pub fn reparametrize_by_arc_length(&self, order: usize, samples: usize) -> Result<Self> {
        let m = samples.max(2 * order + 1);
        let rule = GaussLegendre::new(4);
        let h = 1.0 / m as f64;
        let speed_integral = |a: f64, b: f64| rule.integrate(a, b, |t| self.speed(t));
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for j in 0..m {
            let a = j as f64 * h;
            let last = cum[j];
            cum.push(last + speed_integral(a, a + h));
        }
        let total = cum[m];
        if !(total > 0.0) {
            return Err(Error::VanishingTangent { tau: 0.0 });
        }
        let mut nodes = Vec::with_capacity(m);
        let mut j = 0;
        for i in 0..m {
            let target = total * i as f64 / m as f64;
            while j + 1 < m && cum[j + 1] <= target {
                j += 1;
            }
            let a = j as f64 * h;
            let mut tau = a + h * (target - cum[j]) / (cum[j + 1] - cum[j]);
            for _ in 0..8 {
                let s = cum[j] + speed_integral(a, tau);
                let sp = self.speed(tau);
                if !(sp > 0.0) {
                    return Err(Error::VanishingTangent { tau });
                }
                let step = (s - target) / sp;
                tau -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            nodes.push(self.position(tau));
        }
        fit_fourier(&nodes, order)
    }
}

fn straddles(v: &[f64; 4]) -> bool {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Trigonometric least-squares fit of uniformly spaced nodes `nodes[j] = gamma(j / n)`.
///
/// With `n = 2K + 1` this is exact interpolation; for larger `n` the
/// discrete Fourier projection is the least-squares solution because the
/// sampled modes up to `K` are orthogonal.
pub fn fit_fourier(nodes: &[Vec3], order: usize) -> Result<CurveSpec> {
    let n = nodes.len();
    if order == 0 {
        return Err(Error::MalformedCurve("truncation order must be positive"));
    }
    if n < 2 * order + 1 {
        return Err(Error::InsufficientNodes {
            needed: 2 * order + 1,
            got: n,
        });
    }
    let table: Vec<(f64, f64)> = (0..n).map(|i| sin_cos(TWO_PI * i as f64 / n as f64)).collect();
    let mut cos = Vec::with_capacity(order + 1);
    let mut sin = Vec::with_capacity(order);
    cos.push(nodes.iter().sum::<Vec3>() / n as f64);
    let scale = 2.0 / n as f64;
    for k in 1..=order {
        let mut a = Vec3::zeros();
        let mut b = Vec3::zeros();
        for (j, x) in nodes.iter().enumerate() {
            let (s, c) = table[(k * j) % n];
            a += x * c;
            b += x * s;
        }
        cos.push(a * scale);
        sin.push(b * scale);
    }
    CurveSpec::new(cos, sin)
}
