//! Gauss-Legendre rules and dyadically graded composite panels.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{cos, sqrt};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels of `[0, len]` refined dyadically toward 0.
///
/// Returns `levels + 1` intervals `[len 2^-(l+1), len 2^-l]` for
/// `l < levels`, then the innermost `[0, len 2^-levels]`, ordered from the
/// outside in.
pub fn dyadic_panels(len: f64, levels: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..=levels).map(move |l| {
        let outer = len * pow2(-(l as i32));
        if l == levels {
            (0.0, outer)
        } else {
            (0.5 * outer, outer)
        }
    })
}

/// Number of dyadic levels needed so the innermost panel of `[0, len]` is
/// no wider than `target`.
pub fn levels_for(len: f64, target: f64, cap: usize) -> usize {
    if !(target > 0.0) || len <= target {
        return 0;
    }
    let mut l = 0;
    let mut w = len;
    while w > target && l < cap {
        w *= 0.5;
        l += 1;
    }
    l
}

#[inline]
pub(crate) fn pow2(e: i32) -> f64 {
    let mut r = 1.0;
    if e >= 0 {
        for _ in 0..e {
            r *= 2.0;
        }
    } else {
        for _ in 0..(-e) {
            r *= 0.5;
        }
    }
    r
}

/// Integrates `f` over `[a, b]` with panels graded geometrically toward `a`.
///
/// `ratio` in `(0, 1)` is the width ratio between consecutive panels and
/// `levels` the number of graded panels before the innermost one.
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    ratio: f64,
    levels: usize,
    mut f: F,
) -> f64 {
    let len = b - a;
    let mut sum = 0.0;
    let mut outer = len;
    for _ in 0..levels {
        let inner = outer * ratio;
        sum += rule.integrate(a + inner, a + outer, &mut f);
        outer = inner;
    }
    sum + rule.integrate(a, a + outer, &mut f)
}

/// Composite rule with `panels` equal panels on `[a, b]`.
pub fn integrate_composite<F: FnMut(f64) -> f64>(rule: &GaussLegendre, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|j| rule.integrate(a + j as f64 * h, a + (j + 1) as f64 * h, &mut f))
        .sum()
}

/// Relative distance helper used by tests and fits.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}
