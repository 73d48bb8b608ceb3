//! Dynamic-positioning simulation workbench.
//!
//! A 3-DOF surface vessel (surge, sway, yaw) is driven either by a PID
//! baseline or by an adaptive backstepping controller whose unknown-dynamics
//! term is approximated by a Gaussian RBF network. Disturbances are either
//! constant or a first-order Gauss-Markov bias rotated into the body frame.
//!
//! Plant model used throughout:
//!
//! ```text
//! eta_dot = R(psi) * nu
//! M * nu_dot + D * nu = tau + delta
//! ```
//!
//! with `eta = [x, y, psi]` in the earth frame and `nu = [u, v, r]` in the
//! body frame.
//!
//! Grid networks evaluate their basis as a tensor product of per-axis
//! factors. General networks evaluate node by node; with the `parallel`
//! feature (default) that loop and the multi-scenario sweep are spread over
//! rayon's thread pool, otherwise they run sequentially. The per-node
//! sequential and parallel paths produce bit-identical values.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximators;
pub mod control;
pub mod disturbance;
pub mod error;
pub mod integrator;
mod par;
pub mod sim;
pub mod vessel;

pub use error::{DpError, Result};

/// Crate version, embedded in trace headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
