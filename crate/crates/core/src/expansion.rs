//! Local expansion of the kernel integrand about a curve point.
//!
//! With `gamma(0) = 0`, `x` orthogonal to `gamma'(0)` and
//! `R = sqrt(|x|^2 + |gamma'(0)|^2 sigma^2)`:
//!
//! ```text
//! (x - gamma) x gamma' / |x - gamma|^(3-a)
//!   = [x x g1 + sigma x x g2 - sigma^2/2 g1 x g2] / R^(3-a)
//!   + (3-a)/(2 R^(5-a)) [sigma^2 x.g2 - sigma^3 g1.g2] x x g1
//!   + remainder
//! ```
//!
//! where `g_k` is the `k`-th derivative at 0. The remainder is controlled by
//! eight monomials in `|x|`, `sigma` and `R`.

use alloc::vec::Vec;

use crate::curve::CurveSpec;
use crate::fit::log_slope;
use crate::math::{powf, sqrt};
use crate::{Error, Result, Vec3};

/// `sqrt(|x|^2 + speed^2 sigma^2)`.
pub fn r_value(x: &Vec3, sigma: f64, speed: f64) -> f64 {
    sqrt(x.norm_squared() + speed * speed * sigma * sigma)
}

/// A curve through the origin at parameter 0.
pub trait LocalCurve {
    /// Position and first derivative at `sigma`.
    fn point_and_tangent(&self, sigma: f64) -> (Vec3, Vec3);
    /// First, second and third derivative at 0.
    fn jet_at_origin(&self) -> [Vec3; 3];
}

impl LocalCurve for CurveSpec {
    fn point_and_tangent(&self, sigma: f64) -> (Vec3, Vec3) {
        CurveSpec::point_and_tangent(self, sigma)
    }

    fn jet_at_origin(&self) -> [Vec3; 3] {
        let mut d = [Vec3::zeros(); 4];
        self.derivatives(0.0, &mut d);
        [d[1], d[2], d[3]]
    }
}

/// `sigma -> sigma * direction`; the expansion is exact for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraightLine {
    pub direction: Vec3,
}

impl LocalCurve for StraightLine {
    fn point_and_tangent(&self, sigma: f64) -> (Vec3, Vec3) {
        (self.direction * sigma, self.direction)
    }

    fn jet_at_origin(&self) -> [Vec3; 3] {
        [self.direction, Vec3::zeros(), Vec3::zeros()]
    }
}

/// Powers `(|x|, sigma, R)` of the remainder monomials: `|x|^a sigma^b / R^(c - alpha)`.
pub const REMAINDER_MONOMIALS: [(i32, i32, i32); 8] = [
    (0, 3, 3),
    (1, 2, 3),
    (2, 3, 5),
    (1, 4, 5),
    (0, 5, 5),
    (3, 4, 7),
    (2, 6, 7),
    (0, 8, 7),
];

/// Smallest power of `h` among the monomials when `|x| = sigma = h` (so `R ~ h`).
pub fn minimal_budget_exponent(alpha: f64) -> f64 {
    REMAINDER_MONOMIALS
        .iter()
        .map(|&(a, b, c)| (a + b - c) as f64 + alpha)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerms {
    pub r: f64,
    /// The `1 / R^(3 - alpha)` group.
    pub main_order: Vec3,
    /// The `(3 - alpha) / (2 R^(5 - alpha))` group.
    pub correction: Vec3,
    /// Values of [`REMAINDER_MONOMIALS`].
    pub budget: [f64; 8],
}

impl ExpansionTerms {
    pub fn approximation(&self) -> Vec3 {
        self.main_order + self.correction
    }

    pub fn budget_sum(&self) -> f64 {
        self.budget.iter().sum()
    }
}

/// Relative tolerance for the orthogonality and origin preconditions.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

pub fn expansion_terms<C: LocalCurve + ?Sized>(curve: &C, x: &Vec3, sigma: f64, alpha: f64) -> Result<ExpansionTerms> {
    let [g1, g2, _] = curve.jet_at_origin();
    let (origin, _) = curve.point_and_tangent(0.0);
    let speed = g1.norm();
    if origin.norm() > ORTHOGONALITY_TOL * (1.0 + speed) {
        return Err(Error::InvalidParameter("curve must pass through the origin at 0"));
    }
    let xn = x.norm();
    if xn > 0.0 {
        let cosine = x.dot(&g1) / (xn * speed);
        if cosine.abs() > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { cosine });
        }
    }
    let r = r_value(x, sigma, speed);
    if !(r > 0.0) {
        return Err(Error::SingularPoint);
    }
    let xg1 = x.cross(&g1);
    let main_order = (xg1 + x.cross(&g2) * sigma - g1.cross(&g2) * (0.5 * sigma * sigma)) * powf(r, alpha - 3.0);
    let s2 = sigma * sigma;
    let correction = xg1 * ((3.0 - alpha) / 2.0 * powf(r, alpha - 5.0) * (s2 * x.dot(&g2) - s2 * sigma * g1.dot(&g2)));
    let mut budget = [0.0; 8];
    let sa = sigma.abs();
    for (slot, &(a, b, c)) in budget.iter_mut().zip(&REMAINDER_MONOMIALS) {
        *slot = powf(xn, a as f64) * powf(sa, b as f64) * powf(r, alpha - c as f64);
    }
    Ok(ExpansionTerms {
        r,
        main_order,
        correction,
        budget,
    })
}

/// `(x - gamma(sigma)) x gamma'(sigma) / |x - gamma(sigma)|^(3 - alpha)`.
pub fn exact_integrand<C: LocalCurve + ?Sized>(curve: &C, x: &Vec3, sigma: f64, alpha: f64) -> Result<Vec3> {
    let (p, d) = curve.point_and_tangent(sigma);
    let diff = x - p;
    let r2 = diff.norm_squared();
    if !(r2 > 0.0) {
        return Err(Error::SingularPoint);
    }
    Ok(diff.cross(&d) * powf(r2, 0.5 * (alpha - 3.0)))
}

/// `|exact - (main + correction)|` together with the expansion terms.
pub fn expansion_residual<C: LocalCurve + ?Sized>(
    curve: &C,
    x: &Vec3,
    sigma: f64,
    alpha: f64,
) -> Result<(f64, ExpansionTerms)> {
    let terms = expansion_terms(curve, x, sigma, alpha)?;
    let exact = exact_integrand(curve, x, sigma, alpha)?;
    Ok(((exact - terms.approximation()).norm(), terms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderFit {
    pub scales: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Log-log slope of the residuals; `None` when all lie at rounding level.
    pub slope: Option<f64>,
    pub minimal_exponent: f64,
}

/// Relative size below which a residual counts as rounding noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Residual along the diagonal `sigma = |x| = h` with `x = h * normal`.
pub fn remainder_order_fit_local<C: LocalCurve + ?Sized>(
    curve: &C,
    normal: &Vec3,
    alpha: f64,
    scales: &[f64],
) -> Result<RemainderFit> {
    if scales.len() < 2 || scales.windows(2).any(|w| !(w[1] < w[0])) || scales.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidParameter(
            "scales must be positive and strictly decreasing",
        ));
    }
    let n = normal.normalize();
    let mut residuals = Vec::with_capacity(scales.len());
    let mut noise = Vec::with_capacity(scales.len());
    for &h in scales {
        let x = n * h;
        let (res, _) = expansion_residual(curve, &x, h, alpha)?;
        let size = exact_integrand(curve, &x, h, alpha)?.norm();
        residuals.push(res);
        noise.push(NOISE_FLOOR * size);
    }
    let above: Vec<bool> = residuals.iter().zip(&noise).map(|(r, f)| r > f).collect();
    let slope = if above.iter().all(|a| !a) {
        None
    } else {
        if above.iter().any(|a| !a) {
            return Err(Error::FitFailure);
        }
        if residuals.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::FitFailure);
        }
        Some(log_slope(scales, &residuals)?)
    };
    Ok(RemainderFit {
        scales: scales.to_vec(),
        residuals,
        slope,
        minimal_exponent: minimal_budget_exponent(alpha),
    })
}

/// Remainder fit on `curve` about `gamma(tau)`, approaching along the principal normal
/// (or any normal where the curvature vanishes).
pub fn remainder_order_fit(curve: &CurveSpec, tau: f64, alpha: f64, scales: &[f64]) -> Result<RemainderFit> {
    let local = curve.shifted(tau);
    let normal = match local.frenet(0.0) {
        Ok(f) => f.normal,
        Err(Error::DegenerateCurvature { .. }) => {
            let t = local.eval(0.0, 1).normalize();
            let trial = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            trial - t * trial.dot(&t)
        }
        Err(e) => return Err(e),
    };
    remainder_order_fit_local(&local, &normal, alpha, scales)
}

/// Largest ratio `residual / budget_sum` over a grid of `(|x|, sigma)` and
/// normal directions in the plane orthogonal to the tangent at 0.
pub fn budget_constant<C: LocalCurve + ?Sized>(
    curve: &C,
    alpha: f64,
    x_sizes: &[f64],
    sigmas: &[f64],
    directions: usize,
) -> Result<f64> {
    let [g1, _, _] = curve.jet_at_origin();
    let t = g1.normalize();
    let trial = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let n1 = (trial - t * trial.dot(&t)).normalize();
    let n2 = t.cross(&n1);
    let mut worst: f64 = 0.0;
    for k in 0..directions.max(1) {
        let (s, c) = crate::math::sin_cos(2.0 * core::f64::consts::PI * k as f64 / directions.max(1) as f64);
        let dir = n1 * c + n2 * s;
        for &h in x_sizes {
            for &sig in sigmas {
                for sign in [-1.0, 1.0] {
                    let (res, terms) = expansion_residual(curve, &(dir * h), sign * sig, alpha)?;
                    worst = worst.max(res / terms.budget_sum());
                }
            }
        }
    }
    Ok(worst)
}

/// `int_{-1/2}^{1/2} sigma^2 speed / (z^2 + speed^2 sigma^2)^((3 - alpha) / 2) d sigma`.
///
/// Evaluated through `sigma = u^(1/alpha) / 2`, under which the integrand
/// becomes `speed 2^-alpha / alpha (z^2 / sigma^2 + speed^2)^((alpha - 3) / 2)`:
/// constant for `z = 0`, a smoothed step at `sigma = z / speed` otherwise.
/// Panels are graded toward that step from both sides.
pub fn binormal_integral(z: f64, alpha: f64, speed: f64) -> f64 {
    let rule = crate::quadrature::GaussLegendre::new(20);
    let inv = 1.0 / alpha;
    let half_exp = 0.5 * (alpha - 3.0);
    let z2 = z * z;
    let s2 = speed * speed;
    let scale = speed * powf(0.5, alpha) * inv;
    let f = |u: f64| {
        if z == 0.0 {
            return scale * powf(s2, half_exp);
        }
        let sigma = 0.5 * powf(u, inv);
        if !(sigma > 0.0) {
            return 0.0;
        }
        scale * powf(z2 / (sigma * sigma) + s2, half_exp)
    };
    let step = if z == 0.0 {
        0.0
    } else {
        powf((2.0 * z / speed).min(1.0), alpha)
    };
    let graded = |a: f64, b: f64| crate::quadrature::integrate_graded(&rule, a, b, 0.5, 60, f);
    let mut total = graded(step, 1.0);
    if step > 0.0 {
        // integral over [0, step] graded toward `step`
        total -= graded(step, 0.0);
    }
    2.0 * total
}

/// `speed^(alpha - 2) 2^(1 - alpha) / alpha`, the value at `z = 0`.
pub fn binormal_integral_at_zero(alpha: f64, speed: f64) -> f64 {
    powf(speed, alpha - 2.0) * powf(2.0, 1.0 - alpha) / alpha
}
