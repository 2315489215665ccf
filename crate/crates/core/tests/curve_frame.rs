use std::f64::consts::PI;

use filament_core::curve::{fit_fourier, CurveSpec};
use filament_core::frame::FrameField;
use filament_core::Vec3;
use proptest::prelude::*;

/// Federer's reach, `inf |y - x|^2 / (2 dist(y - x, T_x))`, by brute force over node pairs.
fn federer_reach(curve: &CurveSpec, n: usize) -> f64 {
    let pts: Vec<(Vec3, Vec3)> = (0..n)
        .map(|i| {
            let (p, d) = curve.point_and_tangent(i as f64 / n as f64);
            (p, d.normalize())
        })
        .collect();
    let mut best = f64::INFINITY;
    for (i, (x, t)) in pts.iter().enumerate() {
        for (j, (y, _)) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let v = y - x;
            let perp = (v - t * v.dot(t)).norm();
            if perp > 0.0 {
                best = best.min(v.norm_squared() / (2.0 * perp));
            }
        }
    }
    best
}

fn perturbed_circle(a: [f64; 6]) -> CurveSpec {
    let cos = vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(a[0], a[1], a[2])];
    let sin = vec![Vec3::new(0.0, 1.0, 0.0), Vec3::new(a[3], a[4], a[5])];
    CurveSpec::new(cos, sin).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frenet_frame_is_right_handed_orthonormal(
        a in prop::array::uniform6(-0.15f64..0.15),
        tau in 0.0f64..1.0,
    ) {
        let f = perturbed_circle(a).frenet(tau).unwrap();
        prop_assert!((f.tangent.norm() - 1.0).abs() < 1e-12);
        prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
        prop_assert!(f.tangent.dot(&f.normal).abs() < 1e-12);
        prop_assert!((f.tangent.cross(&f.normal) - f.binormal).norm() < 1e-12);
        prop_assert!(f.curvature > 0.0);
    }

    #[test]
    fn rotation_minimizing_frame_stays_normal_and_periodic(
        a in prop::array::uniform6(-0.15f64..0.15),
        s in 0.0f64..1.0,
    ) {
        let c = perturbed_circle(a);
        let frame = FrameField::new(&c, 512).unwrap();
        let t = c.eval(s, 1).normalize();
        let (n1, n2) = frame.at(s);
        prop_assert!(n1.dot(&t).abs() < 1e-12);
        prop_assert!(n2.dot(&t).abs() < 1e-12);
        prop_assert!(n1.dot(&n2).abs() < 1e-12);
        prop_assert!((n1.norm() - 1.0).abs() < 1e-12);
        let (m1, _) = frame.at(s + 1.0);
        prop_assert!((m1 - n1).norm() < 1e-12);
        prop_assert!(frame.closure_residual() < 1e-12);
    }

    #[test]
    fn reach_scales_linearly(lambda in 0.3f64..12.0) {
        let c = CurveSpec::ellipse(2.0, 1.0);
        let r = c.security_radius(4096).unwrap();
        let rs = c.scaled(lambda).security_radius(4096).unwrap();
        prop_assert!((rs - lambda * r).abs() < 1e-10 * lambda * r);
    }
}

#[test]
fn reach_scaling_at_the_listed_factors() {
    let c = CurveSpec::trefoil();
    let r = c.security_radius(8192).unwrap();
    for lambda in [0.5, 2.0, 10.0] {
        let rs = c.scaled(lambda).security_radius(8192).unwrap();
        assert!(
            (rs - lambda * r).abs() < 1e-10 * lambda * r,
            "lambda {lambda}: {rs} vs {}",
            lambda * r
        );
    }
}

#[test]
fn ellipse_reach_matches_federer_brute_force() {
    let c = CurveSpec::ellipse(2.0, 1.0);
    let est = c.reach(8192).unwrap();
    let brute = federer_reach(&c, 8192);
    assert!((est.radius - 0.5).abs() < 1e-9, "{}", est.radius);
    assert!(
        (brute - est.radius).abs() < 1e-3 * est.radius,
        "{brute} vs {}",
        est.radius
    );
}

#[test]
fn trefoil_reach_matches_federer_brute_force() {
    let c = CurveSpec::trefoil();
    let est = c.reach(8192).unwrap();
    let brute = federer_reach(&c, 4096);
    assert!(brute >= est.radius * (1.0 - 1e-3), "{brute} vs {}", est.radius);
    assert!(
        (brute - est.radius).abs() < 1e-2 * est.radius,
        "{brute} vs {}",
        est.radius
    );
}

#[test]
fn noisy_samples_fit_to_the_noise_level() {
    let truth = CurveSpec::trefoil();
    let n = 128;
    let k = 8;
    let nodes: Vec<Vec3> = (0..n)
        .map(|i| {
            let j = i as f64;
            let noise = Vec3::new((37.0 * j).sin(), (53.0 * j).cos(), (71.0 * j).sin()) * 1e-7;
            truth.position(i as f64 / n as f64) + noise
        })
        .collect();
    let fit = fit_fourier(&nodes, k).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let tau = (i as f64 + 0.5) / 1000.0;
        worst = worst.max((fit.position(tau) - truth.position(tau)).norm());
    }
    assert!(worst <= 1e-5, "{worst}");
    for m in 4..=k {
        assert!(fit.cos_coeffs()[m].norm() < 1e-6 && fit.sin_coeffs()[m - 1].norm() < 1e-6);
    }
}

#[test]
fn frame_holonomy_equals_total_torsion() {
    // A rotation-minimizing frame turns against the Frenet frame at the
    // torsion rate, so the closure angle is minus the total torsion mod 2 pi.
    let c = CurveSpec::trefoil();
    let n = 20000;
    let total: f64 = (0..n)
        .map(|i| {
            let f = c.frenet(i as f64 / n as f64).unwrap();
            f.torsion * f.speed
        })
        .sum::<f64>()
        / n as f64;
    let frame = FrameField::new(&c, 4096).unwrap();
    let diff = frame.holonomy() + total;
    let wrapped = diff - 2.0 * PI * (diff / (2.0 * PI)).round();
    assert!(
        wrapped.abs() < 1e-5,
        "holonomy {} total torsion {total}",
        frame.holonomy()
    );
}

#[test]
fn frame_on_a_planar_curve_has_no_holonomy() {
    let c = CurveSpec::ellipse(2.0, 1.0);
    let frame = FrameField::new(&c, 256).unwrap();
    assert!(frame.holonomy().abs() < 1e-12);
    let b = Vec3::z();
    for i in 0..50 {
        let (n1, n2) = frame.at(i as f64 / 50.0);
        assert!(n1.dot(&b).abs() < 1e-12);
        assert!((n2.dot(&b).abs() - 1.0).abs() < 1e-12);
    }
}
