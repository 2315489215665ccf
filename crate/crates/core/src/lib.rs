//! Fractional Biot-Savart velocity of closed vortex filaments.
//!
//! A closed curve carries vorticity `gamma' * H^1`. The velocity it induces
//! through the kernel `(x - y) / |x - y|^(3 - alpha)` is singular on the
//! curve; mollifying it at scale `epsilon` and sending `epsilon -> 0` leaves a
//! velocity of the form `(C / alpha) * kappa * B + w` with `C` and `w` bounded.
//! This crate evaluates every stage of that statement numerically:
//!
//! * [`curve`]: trigonometric curves, Frenet data, reach estimation, refits.
//! * [`frame`]: rotation-minimizing normal frames with holonomy correction.
//! * [`kernel`]: near-singular line quadrature of the unmollified velocity.
//! * [`mollify`]: tube-coordinate mollification and a Cartesian-grid oracle.
//! * [`expansion`]: the local Taylor expansion of the kernel and its remainder.
//! * [`asymptotics`]: epsilon sweeps, limit extrapolation, `C` and `w` extraction.
//! * [`evolve`]: RK4 advection of the filament under the velocity laws.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `parallel` feature spreads quadrature work over rayon.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod curve;
pub mod error;
pub mod evolve;
pub mod expansion;
pub mod fit;
pub mod frame;
pub mod kernel;
mod math;
pub mod mollify;
mod par;
pub mod quadrature;

pub use error::{Error, Result};

/// Three-vector used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;
