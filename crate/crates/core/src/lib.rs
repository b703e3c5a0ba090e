//! Quantum speed limits for bilinear control systems with fast, unbounded controls.
//!
//! The crate computes the control and dynamical Lie algebras of a system,
//! recognises when the controls generate one of the compact groups `SO(n)`,
//! `Sp(m)` or `S(U(p) x U(q))` inside `SU(n)`, and turns the resulting symmetric
//! space geometry into a lower bound on the time needed to reach any target.
//! [`tightness`] decides when that bound is exact and [`grape`] checks it
//! numerically with optimised piecewise-constant pulses.
//!
//! ```
//! use qsl::lie::{ControlSystem, GroupKind};
//! use qsl::matrix::{sigma_x, sigma_z};
//! use qsl::speed_limit::qsl_bound;
//!
//! let sys = ControlSystem::new(sigma_z(), vec![sigma_x()]).unwrap();
//! let report = qsl_bound(&sys, GroupKind::So(2)).unwrap();
//! assert!((report.bound_theorem - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod grape;
pub mod lie;
pub mod matrix;
pub mod speed_limit;
pub mod tightness;

pub use error::{QslError, Result};
