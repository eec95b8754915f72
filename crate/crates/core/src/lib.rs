//! Design and verification of sharply bent 2D matter-wave guides.
//!
//! * [`designer`] builds curvature profiles: the exact inverse-engineered
//!   bend, the 1D-adiabatic baseline and circular arcs.
//! * [`geometry`] holds the profile representation, path reconstruction,
//!   the equivalent radius and adiabaticity diagnostics.
//! * [`classical`] integrates the curvilinear Newton equations and runs
//!   velocity robustness sweeps.
//! * [`quantum`] solves the curved-space Schrödinger equation on an
//!   (s, y) grid with a unitary split Crank–Nicolson scheme.
//! * [`tables`] reads and writes the CSV and metadata files.
//! * [`reproduce`] holds the built-in presets and reproduction pipelines.
//!
//! Internally everything is dimensionless (length σ, time 1/ω, energy ħω);
//! see [`scenario::UnitSystem`].
// `!(x > 0.0)` also rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod designer;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod quantum;
pub mod roots;
pub mod reproduce;
pub mod scenario;
pub mod tables;

pub use designer::{BendDesign, TransverseTrajectory};
pub use error::{Error, Result};
pub use geometry::{CurvatureProfile, PlanarPath};
pub use scenario::{DesignKind, PhysicalParams, Scenario, UnitSystem};
