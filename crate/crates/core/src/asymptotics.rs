//! Epsilon sweeps, limit extrapolation and the binormal decomposition.
//!
//! The limit `u_0 = lim u_eps(gamma(tau))` is extrapolated from a fit
//! `u_eps = u_0 + A eps^beta` with one exponent shared by all components,
//! then split as `u_0 = (C / alpha) kappa B + w` with `w . B = 0`.

use alloc::vec::Vec;

use crate::curve::{CurveSpec, FrenetData};
use crate::fit::{fit_power_law, linear_regression, PowerLawFit};
use crate::frame::FrameField;
use crate::kernel::{KernelMode, KernelParams};
use crate::math::{ln, powf};
use crate::mollify::{MollifierSpec, TubeQuadSpec, TubeQuadrature};
use crate::{Error, Result, Vec3};

/// Minimum number of mollification scales in a sweep.
pub const MIN_EPSILONS: usize = 4;

/// Curvature below which the binormal decomposition is refused.
pub const CURVATURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsReport {
    pub alpha: f64,
    pub tau: f64,
    pub epsilons: Vec<f64>,
    pub u_values: Vec<Vec3>,
    pub u_limit: Vec3,
    pub c_hat: f64,
    pub w_hat: Vec3,
    pub fit_rate: f64,
    pub fit_residual: f64,
    pub curvature: f64,
    pub binormal: Vec3,
}

impl AsymptoticsReport {
    /// `u_limit . B`.
    pub fn binormal_component(&self) -> f64 {
        self.u_limit.dot(&self.binormal)
    }
}

/// Checks count, strict decrease and geometric spacing of a scale list.
pub fn validate_epsilons(eps: &[f64]) -> Result<()> {
    if eps.len() < MIN_EPSILONS {
        return Err(Error::InvalidParameter("need at least 4 epsilons"));
    }
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("epsilons must be positive"));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("epsilons must be strictly decreasing"));
    }
    let q = eps[1] / eps[0];
    if eps.windows(2).any(|w| ((w[1] / w[0]) - q).abs() > 1e-6 * q) {
        return Err(Error::InvalidParameter("epsilons must form a geometric sequence"));
    }
    Ok(())
}

/// `C = alpha (u . B) / kappa` and `w = u - (C / alpha) kappa B`.
pub fn extract_c(u_limit: &Vec3, alpha: f64, frenet: &FrenetData) -> Result<(f64, Vec3)> {
    if !(frenet.curvature > CURVATURE_TOL) {
        return Err(Error::DegenerateCurvature { tau: f64::NAN });
    }
    let b = frenet.binormal;
    let c_hat = alpha * u_limit.dot(&b) / frenet.curvature;
    let w_hat = u_limit - b * (c_hat / alpha * frenet.curvature);
    Ok((c_hat, w_hat))
}

/// Recomputes `C` and `w` of `report` from new Frenet data.
pub fn extract_c_from_report(report: &AsymptoticsReport, frenet: &FrenetData) -> Result<(f64, Vec3)> {
    extract_c(&report.u_limit, report.alpha, frenet)
}

/// Sweep of `u_eps(gamma(tau))` over `eps` with extrapolation to `eps -> 0`.
pub fn eps_sweep(tube: &TubeQuadrature, tau: f64, template: &MollifierSpec, eps: &[f64]) -> Result<AsymptoticsReport> {
    validate_epsilons(eps)?;
    let params = *tube.params();
    let frenet = tube.curve().frenet(tau)?;
    let mut u_values = Vec::with_capacity(eps.len());
    for &e in eps {
        u_values.push(tube.u_eps(tau, &template.with_epsilon(e)?)?);
    }
    let fit = extrapolate(eps, &u_values)?;
    let alpha = match params.mode {
        KernelMode::Fractional => params.alpha,
        KernelMode::Classical => 1.0,
    };
    let (c_hat, w_hat) = extract_c(&fit.limit, alpha, &frenet).map_err(|e| match e {
        Error::DegenerateCurvature { .. } => Error::DegenerateCurvature { tau },
        other => other,
    })?;
    Ok(AsymptoticsReport {
        alpha: params.alpha,
        tau,
        epsilons: eps.to_vec(),
        u_values,
        u_limit: fit.limit,
        c_hat,
        w_hat,
        fit_rate: fit.rate,
        fit_residual: fit.residual,
        curvature: frenet.curvature,
        binormal: frenet.binormal,
    })
}

/// Power-law extrapolation with the stability check.
pub fn extrapolate(eps: &[f64], u_values: &[Vec3]) -> Result<PowerLawFit> {
    let fit = fit_power_law(eps, u_values)?;
    let last = u_values[u_values.len() - 1];
    let gap = (fit.limit - last).norm();
    let negligible = fit.residual <= 1e-12 * fit.limit.norm().max(last.norm());
    if fit.residual > 0.1 * gap && !negligible {
        return Err(Error::ExtrapolationUnstable {
            residual: fit.residual,
            gap,
        });
    }
    Ok(fit)
}

/// Summary bands over an `(alpha, tau)` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBands {
    /// All `C_hat` share one sign.
    pub sign_consistent: bool,
    pub c_min: f64,
    pub c_max: f64,
    /// Largest `|w_hat|` over the table.
    pub w_max: f64,
    /// Largest `|w_hat|` among rows with the largest alpha.
    pub w_at_largest_alpha: f64,
    /// `max |u . B|` at the smallest alpha over the same at the largest alpha.
    pub binormal_growth: f64,
}

impl SweepBands {
    pub fn c_ratio(&self) -> f64 {
        self.c_max / self.c_min
    }

    pub fn w_ratio(&self) -> f64 {
        self.w_max / self.w_at_largest_alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweep {
    /// Alpha-major, tau-minor order.
    pub reports: Vec<AsymptoticsReport>,
    pub bands: SweepBands,
}

/// Reports for every `(alpha, tau)` pair, in input order.
#[allow(clippy::too_many_arguments)]
pub fn alpha_sweep(
    curve: &CurveSpec,
    frame: &FrameField,
    reach: f64,
    taus: &[f64],
    alphas: &[f64],
    template: &MollifierSpec,
    eps: &[f64],
    quad: TubeQuadSpec,
) -> Result<AlphaSweep> {
    if taus.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha and tau lists must be non-empty"));
    }
    validate_epsilons(eps)?;
    let mut reports = Vec::with_capacity(taus.len() * alphas.len());
    for &alpha in alphas {
        let params = KernelParams::fractional(alpha)?;
        let tube = TubeQuadrature::new(curve, params, frame.clone(), quad, reach)?;
        for &tau in taus {
            reports.push(eps_sweep(&tube, tau, template, eps)?);
        }
    }
    let bands = bands(&reports);
    Ok(AlphaSweep { reports, bands })
}

/// Band statistics of a report table.
pub fn bands(reports: &[AsymptoticsReport]) -> SweepBands {
    let first_sign = reports.first().map(|r| r.c_hat > 0.0).unwrap_or(true);
    let sign_consistent = reports.iter().all(|r| (r.c_hat > 0.0) == first_sign && r.c_hat != 0.0);
    let c_min = reports.iter().map(|r| r.c_hat.abs()).fold(f64::INFINITY, f64::min);
    let c_max = reports.iter().map(|r| r.c_hat.abs()).fold(0.0, f64::max);
    let w_max = reports.iter().map(|r| r.w_hat.norm()).fold(0.0, f64::max);
    let a_max = reports.iter().map(|r| r.alpha).fold(f64::NEG_INFINITY, f64::max);
    let a_min = reports.iter().map(|r| r.alpha).fold(f64::INFINITY, f64::min);
    let w_at_largest_alpha = reports
        .iter()
        .filter(|r| r.alpha == a_max)
        .map(|r| r.w_hat.norm())
        .fold(0.0, f64::max);
    let b_at = |a: f64| {
        reports
            .iter()
            .filter(|r| r.alpha == a)
            .map(|r| r.binormal_component().abs())
            .fold(0.0, f64::max)
    };
    SweepBands {
        sign_consistent,
        c_min,
        c_max,
        w_max,
        w_at_largest_alpha,
        binormal_growth: b_at(a_min) / b_at(a_max),
    }
}

/// Log-law versus power-law fit of a scalar sequence `values[i]` at `eps[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelComparison {
    /// `a + b log(1 / eps)`.
    pub log_slope: f64,
    pub log_r_squared: f64,
    /// `a + b eps^alpha`.
    pub power_r_squared: f64,
}

impl ModelComparison {
    pub fn power_fits_better(&self) -> bool {
        self.power_r_squared > self.log_r_squared
    }
}

pub fn compare_models(eps: &[f64], values: &[f64], alpha: f64) -> Result<ModelComparison> {
    let logs: Vec<f64> = eps.iter().map(|e| ln(1.0 / e)).collect();
    let powers: Vec<f64> = eps.iter().map(|e| powf(*e, alpha)).collect();
    let l = linear_regression(&logs, values)?;
    let p = linear_regression(&powers, values)?;
    Ok(ModelComparison {
        log_slope: l.slope,
        log_r_squared: l.r_squared,
        power_r_squared: p.r_squared,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogCheck {
    pub epsilons: Vec<f64>,
    /// `u_eps . B` at each scale.
    pub binormal: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Regresses the binormal component of `u_eps(gamma(tau))` on `log(1 / eps)`.
pub fn classical_log_check(tube: &TubeQuadrature, tau: f64, template: &MollifierSpec, eps: &[f64]) -> Result<LogCheck> {
    validate_epsilons(eps)?;
    let b = tube.curve().frenet(tau)?.binormal;
    let mut binormal = Vec::with_capacity(eps.len());
    for &e in eps {
        binormal.push(tube.u_eps(tau, &template.with_epsilon(e)?)?.dot(&b));
    }
    let logs: Vec<f64> = eps.iter().map(|e| ln(1.0 / e)).collect();
    let fit = linear_regression(&logs, &binormal)?;
    Ok(LogCheck {
        epsilons: eps.to_vec(),
        binormal,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_list_validation() {
        assert!(validate_epsilons(&[0.08, 0.04]).is_err());
        assert!(validate_epsilons(&[0.08, 0.04, 0.02, 0.02]).is_err());
        assert!(validate_epsilons(&[0.08, 0.04, 0.02, 0.005]).is_err());
        validate_epsilons(&[0.08, 0.04, 0.02, 0.01]).unwrap();
    }

    #[test]
    fn decomposition_reassembles() {
        let f = CurveSpec::ellipse(2.0, 1.0).frenet(0.13).unwrap();
        let u = Vec3::new(0.3, -2.0, 17.0);
        let (c, w) = extract_c(&u, 0.25, &f).unwrap();
        assert!((b_part(c, 0.25, &f) + w - u).norm() < 1e-14 * u.norm());
        assert!(w.dot(&f.binormal).abs() < 1e-13);
    }

    fn b_part(c: f64, a: f64, f: &FrenetData) -> Vec3 {
        f.binormal * (c / a * f.curvature)
    }

    #[test]
    fn model_comparison_prefers_the_generating_law() {
        let eps = [0.08, 0.04, 0.02, 0.01, 0.005];
        let logs: Vec<f64> = eps.iter().map(|e| 3.0 + 2.0 * ln(1.0 / e)).collect();
        let m = compare_models(&eps, &logs, 0.25).unwrap();
        assert!(!m.power_fits_better());
        let pow: Vec<f64> = eps.iter().map(|e| 3.0 - 2.0 * powf(*e, 0.25)).collect();
        assert!(compare_models(&eps, &pow, 0.25).unwrap().power_fits_better());
    }
}
