//! Simulation and analysis toolkit for the stochastic Brusselator.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`model`] | vector fields, Wong–Zakai correction, Jacobian, equilibrium, Hopf threshold |
//! | [`noise`] | reproducible Wiener increments, fast-time rescaling |
//! | [`integrator`] | Euler–Maruyama trajectories and shared-noise two-point motion |
//! | [`ftle`] | variational co-integration, FTLE fields and horizon series, dominant frequency |
//! | [`slowfast`] | slow-fast coordinates, critical manifold, nullcline, regimes, hitting times |
//! | [`ssa`] | Gillespie direct method for the reaction jump process |

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ftle;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod slowfast;
pub mod ssa;

pub use error::{Error, Result};
pub use linalg::Mat2;
pub use model::{Params, State};
pub use noise::NoisePath;
