//! Simulator and verification toolkit for generalized point-vortex dynamics.
//!
//! The library evaluates the planar `alpha`-point-vortex field and the Euler
//! field in the unit disc, integrates them with an adaptive embedded
//! Runge-Kutta pair that detects finite-time collapses, constructs exact
//! self-similar three-vortex collapses for any `alpha > 0`, partitions
//! configurations into certified distance clusters, and estimates Hölder
//! exponents of trajectories at the time of collapse.
//!
//! Entry points by task:
//! - field and invariants: [`core`]
//! - time integration and collapse detection: [`integrate`]
//! - certified cluster partitions: [`cluster`]
//! - exact collapse constructions: [`selfsimilar`]
//! - post-hoc trajectory verification: [`analysis`]
//! - vortices in the unit disc: [`disc`]
//! - scenario files, CSV/JSON artifacts: [`scenario`]
//!
//! The `examples/` directory holds one runnable program per capability.

pub mod analysis;
pub mod cluster;
pub mod core;
pub mod disc;
pub mod error;
pub mod geom;
pub mod integrate;
pub mod scenario;
pub mod selfsimilar;

pub use error::{Error, Result};
pub use geom::Vec2;
