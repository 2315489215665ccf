use filament_core::asymptotics::eps_sweep;
use filament_core::curve::CurveSpec;
use filament_core::evolve::{run, step, step_with_field, CoefficientSource, Evolver, SimConfig, VelocityMode};
use filament_core::fit::log_slope;
use filament_core::frame::FrameField;
use filament_core::kernel::KernelParams;
use filament_core::mollify::{MollifierSpec, TubeQuadSpec, TubeQuadrature};
use filament_core::{Error, Vec3};

fn limiting(alpha: f64, coefficient: CoefficientSource, dt: f64, steps: usize) -> SimConfig {
    let mut cfg = SimConfig::new(VelocityMode::LimitingLaw { alpha, coefficient }, dt, steps);
    cfg.nodes = 16;
    cfg.refit_order = 4;
    cfg
}

/// Largest deviation of `|gamma - center|` from `radius`, and of `(gamma - center) . axis` from 0.
fn circle_error(c: &CurveSpec, center: Vec3, radius: f64, axis: Vec3) -> (f64, f64) {
    let mut r_err: f64 = 0.0;
    let mut p_err: f64 = 0.0;
    for i in 0..200 {
        let d = c.position(i as f64 / 200.0) - center;
        r_err = r_err.max((d.norm() - radius).abs());
        p_err = p_err.max(d.dot(&axis).abs());
    }
    (r_err, p_err)
}

#[test]
fn circle_translates_rigidly_under_the_limiting_law() {
    let c = CurveSpec::circle(1.0);
    let cfg = limiting(0.25, CoefficientSource::Given(-2.0), 0.01, 1);
    let next = step(&c, &cfg).unwrap();
    // speed (C / alpha) kappa = -8 along the binormal +z
    let center = Vec3::new(0.0, 0.0, -0.08);
    let (r_err, p_err) = circle_error(&next, center, 1.0, Vec3::z());
    assert!(r_err < 1e-6 && p_err < 1e-6, "{r_err} {p_err}");
    assert!((next.center_of_mass() - center).norm() < 1e-12);
}

#[test]
fn circle_under_extrapolated_coefficients_stays_circular() {
    let c = CurveSpec::circle(1.0);
    let mut cfg = limiting(0.25, CoefficientSource::PerStep, 0.002, 1);
    cfg.nodes = 12;
    cfg.tube = TubeQuadSpec {
        s_nodes: 32,
        radial_nodes: 16,
        angular_nodes: 8,
        line_nodes: 128,
    };
    let next = step(&c, &cfg).unwrap();
    let com = next.center_of_mass();
    assert!(com.x.abs() + com.y.abs() < 1e-10);
    assert!(com.z < 0.0, "fractional filaments move against the binormal: {com:?}");
    let (r_err, p_err) = circle_error(&next, com, 1.0, Vec3::z());
    assert!(r_err < 1e-6 && p_err < 1e-6, "{r_err} {p_err}");
}

#[test]
fn hundred_steps_keep_length_and_a_straight_center_path() {
    let c = CurveSpec::circle(1.0);
    let cfg = limiting(0.25, CoefficientSource::Given(-2.0), 0.01, 100);
    let traj = run(&c, &cfg).unwrap();
    assert!(traj.halted.is_none());
    assert_eq!(traj.snapshots.len(), 101);
    let l0 = traj.diagnostics[0].length;
    for d in &traj.diagnostics {
        assert!((d.length - l0).abs() < 1e-5 * l0);
        let com = d.center;
        assert!(com.x.abs() + com.y.abs() < 1e-9, "{com:?}");
        assert!((com.z + 8.0 * d.time).abs() < 1e-9 * (1.0 + d.time));
    }
}

#[test]
fn rk4_converges_at_fourth_order_on_an_ellipse() {
    let c = CurveSpec::ellipse(1.5, 1.0);
    let end = |dt: f64| {
        let mut cfg = SimConfig::new(
            VelocityMode::LimitingLaw {
                alpha: 0.25,
                coefficient: CoefficientSource::Given(0.25),
            },
            dt,
            (0.2 / dt).round() as usize,
        );
        cfg.nodes = 32;
        cfg.refit_order = 6;
        cfg.reparametrize = false;
        cfg.diagnostics_every = 0;
        run(&c, &cfg).unwrap().last().curve.clone()
    };
    let dts = [0.02, 0.01, 0.005, 0.0025];
    let reference = end(0.00125);
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let e = end(dt);
            (0..64)
                .map(|i| (e.position(i as f64 / 64.0) - reference.position(i as f64 / 64.0)).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let slope = log_slope(&dts, &errs).unwrap();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}, errors {errs:?}");
}

#[test]
fn mollified_circle_moves_with_its_mollified_velocity() {
    let c = CurveSpec::circle(1.0);
    let (alpha, eps, dt) = (0.25, 0.02, 0.001);
    let mut cfg = SimConfig::new(VelocityMode::Mollified { alpha, epsilon: eps }, dt, 1);
    cfg.nodes = 16;
    cfg.refit_order = 4;
    let next = step(&c, &cfg).unwrap();
    let com = next.center_of_mass();
    let (r_err, p_err) = circle_error(&next, com, 1.0, Vec3::z());
    assert!(r_err < 1e-4 && p_err < 1e-4, "{r_err} {p_err}");
    let reach = c.security_radius(8192).unwrap();
    let tube = TubeQuadrature::new(
        &c,
        KernelParams::fractional(alpha).unwrap(),
        FrameField::new(&c, 256).unwrap(),
        TubeQuadSpec::default(),
        reach,
    )
    .unwrap();
    let u = tube.u_eps(0.0, &MollifierSpec::bump(eps).unwrap()).unwrap();
    assert!((com.z / dt - u.z).abs() < 1e-6 * u.z.abs(), "{} vs {}", com.z / dt, u.z);
}

#[test]
#[ignore = "known to fail by about 23%: the mollified speed at eps = 0.02 is still far from its eps -> 0 limit"]
fn mollified_circle_speed_matches_the_limiting_law() {
    let c = CurveSpec::circle(1.0);
    let (alpha, eps, dt) = (0.25, 0.02, 0.001);
    let mut cfg = SimConfig::new(VelocityMode::Mollified { alpha, epsilon: eps }, dt, 1);
    cfg.nodes = 16;
    cfg.refit_order = 4;
    let speed = step(&c, &cfg).unwrap().center_of_mass().z / dt;
    let reach = c.security_radius(8192).unwrap();
    let tube = TubeQuadrature::new(
        &c,
        KernelParams::fractional(alpha).unwrap(),
        FrameField::new(&c, 256).unwrap(),
        TubeQuadSpec::default(),
        reach,
    )
    .unwrap();
    let eps_list = [0.08, 0.04, 0.02, 0.01];
    let r = eps_sweep(&tube, 0.0, &MollifierSpec::bump(0.08).unwrap(), &eps_list).unwrap();
    let law = r.c_hat / alpha * r.curvature;
    assert!((speed - law).abs() < 0.05 * law.abs(), "{speed} vs {law}");
}

#[test]
fn zero_field_returns_the_same_curve() {
    let c = CurveSpec::trefoil();
    let mut cfg = limiting(0.25, CoefficientSource::Given(0.0), 0.1, 1);
    cfg.nodes = 32;
    cfg.refit_order = 3;
    cfg.reparametrize = false;
    let next = step_with_field(&c, &cfg, |_, taus| Ok(vec![Vec3::zeros(); taus.len()])).unwrap();
    for (a, b) in next.cos_coeffs().iter().zip(c.cos_coeffs()) {
        assert!((a - b).norm() < 1e-12);
    }
    for (a, b) in next.sin_coeffs().iter().zip(c.sin_coeffs()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn mollified_ellipse_run_completes_or_halts_with_a_typed_error() {
    let c = CurveSpec::ellipse(2.0, 1.0);
    let mut cfg = SimConfig::new(
        VelocityMode::Mollified {
            alpha: 0.25,
            epsilon: 0.05,
        },
        2e-4,
        50,
    );
    cfg.nodes = 24;
    cfg.refit_order = 8;
    cfg.diagnostics_every = 10;
    cfg.tube = TubeQuadSpec {
        s_nodes: 16,
        radial_nodes: 8,
        angular_nodes: 8,
        line_nodes: 64,
    };
    cfg.frame_samples = 128;
    let traj = run(&c, &cfg).unwrap();
    match &traj.halted {
        None => assert_eq!(traj.last().step, 50),
        Some(e) => assert!(
            matches!(
                e,
                Error::SecurityRadiusViolated { .. } | Error::NonSimpleCurve { .. } | Error::DegenerateCurvature { .. }
            ),
            "{e:?}"
        ),
    }
    for s in &traj.snapshots {
        for v in s.curve.cos_coeffs().iter().chain(s.curve.sin_coeffs()) {
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }
    for d in &traj.diagnostics {
        assert!(d.length.is_finite() && d.kappa_max.is_finite());
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let c = CurveSpec::ellipse(1.5, 1.0);
    let mut cfg = limiting(0.25, CoefficientSource::Given(0.3), 0.01, 5);
    cfg.nodes = 24;
    cfg.refit_order = 6;
    let a = run(&c, &cfg).unwrap();
    let b = Evolver::new(cfg).unwrap().run(&c).unwrap();
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.diagnostics, b.diagnostics);
}

#[test]
fn epsilon_outside_the_security_radius_halts() {
    let c = CurveSpec::ellipse(2.0, 1.0);
    let mut cfg = SimConfig::new(
        VelocityMode::Mollified {
            alpha: 0.25,
            epsilon: 0.48,
        },
        1e-3,
        3,
    );
    cfg.nodes = 16;
    cfg.refit_order = 4;
    let traj = run(&c, &cfg).unwrap();
    assert!(matches!(traj.halted, Some(Error::SecurityRadiusViolated { .. })));
    assert_eq!(traj.snapshots.len(), 1);
}
