//! Periodic orthonormal normal frames along a closed curve.
//!
//! The frame is rotation-minimizing (double-reflection marching) with the
//! closure holonomy removed by a rotation growing linearly in the parameter.

use alloc::vec::Vec;

use crate::curve::CurveSpec;
use crate::math::{atan2, floor, sin_cos, wrap01};
use crate::{Error, Result, Vec3};

/// Smallest admissible number of frame samples.
pub const MIN_FRAME_SAMPLES: usize = 64;

#[derive(Debug, Clone)]
pub struct FrameField {
    curve: CurveSpec,
    points: Vec<Vec3>,
    tangents: Vec<Vec3>,
    /// Rotation-minimizing first normal before holonomy correction.
    normals: Vec<Vec3>,
    holonomy: f64,
}

fn rotate_about(r: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = sin_cos(angle);
    r * c + axis.cross(&r) * s
}

/// One double-reflection step carrying `r` from `(x0, t0)` to `(x1, t1)`.
fn transport(x0: Vec3, t0: Vec3, r: Vec3, x1: Vec3, t1: Vec3) -> Vec3 {
    let v1 = x1 - x0;
    let c1 = v1.norm_squared();
    let (rl, tl) = if c1 > 0.0 {
        (r - v1 * (2.0 * v1.dot(&r) / c1), t0 - v1 * (2.0 * v1.dot(&t0) / c1))
    } else {
        (r, t0)
    };
    let v2 = t1 - tl;
    let c2 = v2.norm_squared();
    let out = if c2 > 0.0 {
        rl - v2 * (2.0 * v2.dot(&rl) / c2)
    } else {
        rl
    };
    (out - t1 * out.dot(&t1)).normalize()
}

fn any_perpendicular(t: Vec3) -> Vec3 {
    let trial = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (trial - t * trial.dot(&t)).normalize()
}

impl FrameField {
    /// Frame on `samples` uniform nodes starting from the principal normal at 0.
    pub fn new(curve: &CurveSpec, samples: usize) -> Result<Self> {
        Self::with_initial_rotation(curve, samples, 0.0)
    }

    /// As [`FrameField::new`], with the starting normal turned by `angle` about the tangent.
    pub fn with_initial_rotation(curve: &CurveSpec, samples: usize, angle: f64) -> Result<Self> {
        if samples < MIN_FRAME_SAMPLES {
            return Err(Error::InsufficientNodes {
                needed: MIN_FRAME_SAMPLES,
                got: samples,
            });
        }
        let mut points = Vec::with_capacity(samples + 1);
        let mut tangents = Vec::with_capacity(samples + 1);
        for i in 0..=samples {
            let tau = i as f64 / samples as f64;
            let (p, d) = curve.point_and_tangent(tau);
            let s = d.norm();
            if !(s > 0.0) {
                return Err(Error::VanishingTangent { tau });
            }
            points.push(p);
            tangents.push(d / s);
        }
        let start = match curve.frenet(0.0) {
            Ok(f) => f.normal,
            Err(Error::DegenerateCurvature { .. }) => any_perpendicular(tangents[0]),
            Err(e) => return Err(e),
        };
        let mut normals = Vec::with_capacity(samples + 1);
        normals.push(rotate_about(start, tangents[0], angle));
        for i in 0..samples {
            let next = transport(points[i], tangents[i], normals[i], points[i + 1], tangents[i + 1]);
            normals.push(next);
        }
        let (r0, rk, t0) = (normals[0], normals[samples], tangents[0]);
        let holonomy = atan2(r0.cross(&rk).dot(&t0), r0.dot(&rk));
        Ok(Self {
            curve: curve.clone(),
            points,
            tangents,
            normals,
            holonomy,
        })
    }

    pub fn samples(&self) -> usize {
        self.points.len() - 1
    }

    /// Closure angle of the uncorrected rotation-minimizing frame.
    pub fn holonomy(&self) -> f64 {
        self.holonomy
    }

    /// Corrected frame at node `i` (`i == samples()` is the marched end point).
    pub fn node(&self, i: usize) -> (Vec3, Vec3) {
        let tau = i as f64 / self.samples() as f64;
        let t = self.tangents[i];
        let n1 = rotate_about(self.normals[i], t, -self.holonomy * tau);
        (n1, t.cross(&n1))
    }

    /// `|n_1(1) - n_1(0)|` after holonomy correction.
    pub fn closure_residual(&self) -> f64 {
        (self.node(self.samples()).0 - self.node(0).0).norm()
    }

    /// Orthonormal pair spanning the normal plane at `s`.
    pub fn at(&self, s: f64) -> (Vec3, Vec3) {
        let s = wrap01(s);
        let k = self.samples();
        let pos = s * k as f64;
        let i = (floor(pos) as usize).min(k - 1);
        let (x, d) = self.curve.point_and_tangent(s);
        let t = d.normalize();
        let r = transport(self.points[i], self.tangents[i], self.normals[i], x, t);
        let n1 = rotate_about(r, t, -self.holonomy * s);
        (n1, t.cross(&n1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_frame_is_inward_radial() {
        let f = FrameField::new(&CurveSpec::circle(1.0), 256).unwrap();
        assert!(f.holonomy().abs() < 1e-12);
        for i in 0..10 {
            let s = i as f64 / 10.0 + 0.013;
            let (n1, n2) = f.at(s);
            let (sn, cs) = sin_cos(2.0 * core::f64::consts::PI * s);
            assert!((n1 - Vec3::new(-cs, -sn, 0.0)).norm() < 1e-10);
            assert!((n2 - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn trefoil_frame_is_orthonormal_and_closes() {
        let c = CurveSpec::trefoil();
        let f = FrameField::new(&c, 512).unwrap();
        assert!(f.closure_residual() < 1e-8);
        for i in 0..=f.samples() {
            let (n1, n2) = f.node(i);
            let t = c.eval(i as f64 / 512.0, 1).normalize();
            assert!(n1.dot(&t).abs() < 1e-10);
            assert!(n2.dot(&t).abs() < 1e-10);
            assert!(n1.dot(&n2).abs() < 1e-10);
            assert!((n1.norm() - 1.0).abs() < 1e-12);
        }
        let fine = FrameField::new(&c, 4096).unwrap();
        assert!((f.holonomy() - fine.holonomy()).abs() < 1e-4);
    }

    #[test]
    fn interpolation_is_continuous_at_nodes() {
        let c = CurveSpec::trefoil();
        let f = FrameField::new(&c, 128).unwrap();
        for i in 1..128 {
            let s = i as f64 / 128.0;
            let (a, _) = f.at(s - 1e-12);
            let (b, _) = f.at(s);
            assert!((a - b).norm() < 1e-8);
        }
        let (a, _) = f.at(1.0 - 1e-13);
        let (b, _) = f.at(0.0);
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn too_few_samples() {
        assert!(FrameField::new(&CurveSpec::circle(1.0), 16).is_err());
    }
}
