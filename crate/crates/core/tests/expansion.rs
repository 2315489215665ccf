use std::f64::consts::PI;

use filament_core::curve::CurveSpec;
use filament_core::expansion::{
    binormal_integral, binormal_integral_at_zero, budget_constant, expansion_residual, expansion_terms,
    minimal_budget_exponent, r_value, remainder_order_fit, remainder_order_fit_local, StraightLine,
};
use filament_core::{Error, Vec3};

/// Smooth closed curve with pseudo-random coefficients decaying like `k^-3`.
fn random_curve() -> CurveSpec {
    let k = 6;
    let h = |i: usize| ((i as f64 * 12.9898).sin() * 43758.5453).fract();
    let v = |i: usize, scale: f64| Vec3::new(h(3 * i), h(3 * i + 1), h(3 * i + 2)) * scale;
    let mut cos = vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)];
    let mut sin = vec![Vec3::new(0.0, 1.0, 0.0)];
    for m in 2..=k {
        let s = 0.3 / (m * m * m) as f64;
        cos.push(v(2 * m, s));
        sin.push(v(2 * m + 1, s));
    }
    cos[1] += v(1, 0.1);
    sin[0] += v(2, 0.1);
    CurveSpec::new(cos, sin).unwrap()
}

/// `I(z)` by the midpoint rule in `log sigma`.
fn binormal_oracle(z: f64, alpha: f64, speed: f64) -> f64 {
    let (lo, hi) = ((1e-14f64).ln(), (0.5f64).ln());
    let n = 400_000;
    let h = (hi - lo) / n as f64;
    let sum: f64 = (0..n)
        .map(|i| {
            let s = (lo + (i as f64 + 0.5) * h).exp();
            s * s * speed * (z * z + speed * speed * s * s).powf(0.5 * (alpha - 3.0)) * s
        })
        .sum();
    2.0 * sum * h
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn halving(start: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start / 2f64.powi(i as i32)).collect()
}

#[test]
fn r_value_examples() {
    let x = Vec3::new(0.1, 0.0, 0.0);
    assert!((r_value(&x, 0.2, 2.0 * PI) - 1.2606).abs() < 1e-4);
    assert!((r_value(&Vec3::zeros(), -0.3, 2.0) - 0.6).abs() < 1e-15);
    assert_eq!(r_value(&x, 0.0, 5.0), 0.1);
}

/// Uniform constant allowed in front of the summed remainder monomials.
const BUDGET_CONSTANT: f64 = 50.0;

#[test]
fn circle_point_is_within_the_summed_budget() {
    // Radius 1 / (2 pi): parameter and arc length agree, so the monomials are
    // dimensionally consistent.
    let radius = 1.0 / (2.0 * PI);
    let c = CurveSpec::circle(radius).translated(Vec3::new(-radius, 0.0, 0.0));
    let n1 = c.frenet(0.0).unwrap().normal;
    let (res, terms) = expansion_residual(&c, &(n1 * 0.05), 0.02, 0.25).unwrap();
    assert!(
        res <= BUDGET_CONSTANT * terms.budget_sum(),
        "residual {res} budget {}",
        terms.budget_sum()
    );
    assert!(res < 1e-2 * terms.approximation().norm());
}

#[test]
fn zero_offset_keeps_only_the_curvature_term() {
    let c = CurveSpec::trefoil().shifted(0.2);
    let c = c.translated(-c.position(0.0));
    let g1 = c.eval(0.0, 1);
    let g2 = c.eval(0.0, 2);
    let t = expansion_terms(&c, &Vec3::zeros(), 0.03, 0.3).unwrap();
    let expect = -g1.cross(&g2) * (0.5 * 0.03 * 0.03) * t.r.powf(0.3 - 3.0);
    assert!((t.main_order - expect).norm() < 1e-12 * expect.norm());
    assert_eq!(t.correction, Vec3::zeros());
}

#[test]
fn reversing_orientation_flips_the_curvature_term() {
    let c = CurveSpec::ellipse(2.0, 1.0).translated(Vec3::new(-2.0, 0.0, 0.0));
    let r = c.reversed();
    let sigma = 0.04;
    let a = expansion_terms(&c, &Vec3::zeros(), sigma, 0.25).unwrap();
    let b = expansion_terms(&r, &Vec3::zeros(), sigma, 0.25).unwrap();
    assert!((a.main_order + b.main_order).norm() < 1e-12 * a.main_order.norm());
}

#[test]
fn non_orthogonal_offsets_are_rejected() {
    let c = CurveSpec::circle(1.0).translated(Vec3::new(-1.0, 0.0, 0.0));
    let t = c.eval(0.0, 1).normalize();
    let n = c.frenet(0.0).unwrap().normal;
    let e = expansion_terms(&c, &((n + t * 0.1) * 0.05), 0.01, 0.25).unwrap_err();
    assert!(matches!(e, Error::NotOrthogonal { .. }));
}

#[test]
fn remainder_order_on_the_circle() {
    let c = CurveSpec::circle(1.0);
    for alpha in [0.25, 0.45] {
        let fit = remainder_order_fit(&c, 0.0, alpha, &halving(2e-3, 5)).unwrap();
        let slope = fit.slope.unwrap();
        assert_eq!(fit.minimal_exponent, minimal_budget_exponent(alpha));
        assert!((slope - fit.minimal_exponent).abs() < 0.2, "alpha {alpha}: {slope}");
    }
}

#[test]
fn remainder_order_on_a_random_curve() {
    let c = random_curve();
    for tau in [0.0, 0.37, 0.81] {
        let fit = remainder_order_fit(&c, tau, 0.45, &halving(2e-3, 5)).unwrap();
        let slope = fit.slope.unwrap();
        assert!((slope - fit.minimal_exponent).abs() < 0.2, "tau {tau}: {slope}");
    }
}

#[test]
fn straight_line_expansion_is_exact() {
    let line = StraightLine {
        direction: Vec3::new(1.0, 2.0, -0.5),
    };
    let normal = Vec3::new(2.0, -1.0, 0.0);
    let fit = remainder_order_fit_local(&line, &normal, 0.3, &halving(0.1, 6)).unwrap();
    assert_eq!(fit.slope, None);
    for r in &fit.residuals {
        assert!(*r < 1e-12, "{r}");
    }
}

#[test]
fn uniform_budget_constant_on_a_unit_speed_circle() {
    // Radius 1 / (2 pi): parameter and arc length agree, so the monomials are
    // dimensionally consistent.
    let c = CurveSpec::circle(1.0 / (2.0 * PI)).translated(Vec3::new(-1.0 / (2.0 * PI), 0.0, 0.0));
    let sizes = logspace(0.01, 0.1, 6);
    let sigmas = logspace(0.01, 0.1, 6);
    for alpha in [0.05, 0.25, 0.45] {
        let k = budget_constant(&c, alpha, &sizes, &sigmas, 8).unwrap();
        assert!(k <= BUDGET_CONSTANT, "alpha {alpha}: {k}");
    }
}

#[test]
fn binormal_integral_closed_form_at_zero() {
    assert!((binormal_integral_at_zero(0.5, 1.0) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((binormal_integral_at_zero(0.25, 1.0) - 6.727171322029716).abs() < 1e-12);
    for alpha in [0.05, 0.25, 0.45] {
        for speed in [1.0, 2.0 * PI] {
            let got = binormal_integral(0.0, alpha, speed);
            let exact = binormal_integral_at_zero(alpha, speed);
            assert!((got - exact).abs() < 1e-6 * exact, "{alpha} {speed}: {got} vs {exact}");
        }
    }
}

#[test]
fn binormal_integral_against_the_log_midpoint_rule() {
    for (z, alpha, speed) in [
        (1e-4, 0.05, 1.0),
        (1e-2, 0.25, 1.0),
        (0.2, 0.45, 1.0),
        (3e-3, 0.3, 2.0 * PI),
    ] {
        let got = binormal_integral(z, alpha, speed);
        let oracle = binormal_oracle(z, alpha, speed);
        assert!(
            (got - oracle).abs() < 1e-8 * oracle,
            "z {z} alpha {alpha}: {got} vs {oracle}"
        );
    }
}

#[test]
fn binormal_integral_bands_on_the_grid() {
    let zs = logspace(1e-6, 0.25, 20);
    let (c_low, c_up) = (0.7, 2.0);
    for i in 0..9 {
        let alpha = 0.05 + 0.05 * i as f64;
        let mut prev = f64::INFINITY;
        for &z in &zs {
            let v = binormal_integral(z, alpha, 1.0);
            assert!(v < prev, "not decreasing at z {z}, alpha {alpha}");
            prev = v;
            assert!(
                v >= c_low * (1.0 - z.powf(alpha)) / alpha,
                "lower band at z {z}, alpha {alpha}"
            );
            assert!(v <= c_up / alpha, "upper band at z {z}, alpha {alpha}");
            let scaled = alpha * v;
            assert!(
                (0.05..=2.0).contains(&scaled),
                "alpha I = {scaled} at z {z}, alpha {alpha}"
            );
        }
    }
}
