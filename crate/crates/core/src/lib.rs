//! Numerical toolkit for the Kuramoto mean field game.
//!
//! The stationary problem reduces to a scalar map `a ↦ F_κ(a)` whose fixed
//! points are the equilibria; [`ergodic`] and [`linearized`] evaluate the map
//! and its derivative, [`equilibrium`] locates the fixed points, [`dynamic`]
//! integrates the time-dependent forward-backward system and [`analysis`]
//! holds the stability constants and decay lemmas checked along trajectories.

// NaN must fail validation, so `!(x > 0.0)` is intended throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamic;
pub mod equilibrium;
pub mod ergodic;
pub mod error;
pub mod grid;
pub mod linearized;
pub mod tridiag;
pub mod turnpike;

pub use error::{MfgError, Result};
pub use grid::{Grid1D, Parity, ScalarField};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
