//! Small regression helpers shared by the asymptotic analysis and tests.

use alloc::vec::Vec;

use crate::math::{exp, ln, powf, sqrt};
use crate::{Error, Result, Vec3};

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    /// Sum of squared residuals.
    pub ssr: f64,
}

pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::FitFailure);
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if !(sxx > 0.0) || !sxy.is_finite() {
        return Err(Error::FitFailure);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        ssr,
    })
}

/// Slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::FitFailure);
    }
    let lx: Vec<f64> = x.iter().map(|v| ln(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| ln(*v)).collect();
    Ok(linear_regression(&lx, &ly)?.slope)
}

/// Vector power law `u(eps) = limit + amplitude * eps^rate` with one shared rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub limit: Vec3,
    pub amplitude: Vec3,
    pub rate: f64,
    /// Root-mean-square residual over all components and samples.
    pub residual: f64,
}

/// Admissible exponent range for [`fit_power_law`].
pub const RATE_RANGE: (f64, f64) = (0.005, 4.0);

/// Fits `values[i] = limit + amplitude * eps[i]^rate`.
///
/// For fixed `rate` the problem is linear; the exponent minimizing the total
/// squared residual is located on a log-spaced grid and polished by
/// golden-section search.
pub fn fit_power_law(eps: &[f64], values: &[Vec3]) -> Result<PowerLawFit> {
    let n = eps.len();
    if n < 3 || values.len() != n || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::FitFailure);
    }
    let (lo, hi) = (ln(RATE_RANGE.0), ln(RATE_RANGE.1));
    let grid = 400;
    let at = |i: usize| lo + (hi - lo) * i as f64 / grid as f64;
    let cost = |log_rate: f64| solve_linear(eps, values, exp(log_rate)).map(|f| f.1);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        if let Some(c) = cost(at(i)) {
            if c < best {
                best = c;
                best_i = i;
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::FitFailure);
    }
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(grid));
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let f = |t: f64| cost(t).unwrap_or(f64::INFINITY);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mut log_rate = 0.5 * (a + b);
    if f(log_rate) > best {
        log_rate = at(best_i);
    }
    let rate = exp(log_rate);
    let (coef, ssr) = solve_linear(eps, values, rate).ok_or(Error::FitFailure)?;
    Ok(PowerLawFit {
        limit: coef.0,
        amplitude: coef.1,
        rate,
        residual: sqrt(ssr / (3 * n) as f64),
    })
}

/// Least squares for `limit` and `amplitude` at a fixed rate; returns the
/// coefficients and the total squared residual.
fn solve_linear(eps: &[f64], values: &[Vec3], rate: f64) -> Option<((Vec3, Vec3), f64)> {
    let basis: Vec<f64> = eps.iter().map(|e| powf(*e, rate)).collect();
    let n = eps.len() as f64;
    let sb: f64 = basis.iter().sum();
    let sbb: f64 = basis.iter().map(|b| b * b).sum();
    let det = n * sbb - sb * sb;
    if !(det > 1e-14 * n * sbb) {
        return None;
    }
    let sy: Vec3 = values.iter().sum();
    let sby: Vec3 = basis.iter().zip(values).map(|(b, v)| v * *b).sum();
    let limit = (sy * sbb - sby * sb) / det;
    let amplitude = (sby * n - sy * sb) / det;
    let ssr = basis
        .iter()
        .zip(values)
        .map(|(b, v)| (v - limit - amplitude * *b).norm_squared())
        .sum();
    Some(((limit, amplitude), ssr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_is_exact_on_lines() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let f = linear_regression(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_law_recovers_synthetic_data() {
        let eps = [0.08, 0.04, 0.02, 0.01, 0.005];
        let limit = Vec3::new(0.3, -1.0, 12.0);
        let amp = Vec3::new(1.0, 2.0, -7.0);
        let vals: Vec<Vec3> = eps.iter().map(|e| limit + amp * powf(*e, 0.37)).collect();
        let fit = fit_power_law(&eps, &vals).unwrap();
        assert!((fit.rate - 0.37).abs() < 1e-6, "{}", fit.rate);
        assert!((fit.limit - limit).norm() < 1e-5);
        assert!(fit.residual < 1e-8);
    }

    #[test]
    fn degenerate_inputs_fail() {
        assert_eq!(log_slope(&[1.0, 2.0], &[0.0, 1.0]), Err(Error::FitFailure));
        assert!(fit_power_law(&[0.1, 0.2], &[Vec3::zeros(); 2]).is_err());
    }
}
