//! Curved-guide Schrödinger solver on a uniform (s, y) grid.
//!
//! The Hamiltonian (natural units)
//!
//! ```text
//! H = −½ [ (1/h) ∂_y h ∂_y + (1/h) ∂_s (1/h) ∂_s ] + ½ y²,   h = 1 − κ(s) y
//! ```
//!
//! is self-adjoint under ⟨f, g⟩_h = ∫ f* g h ds dy; its flux-form
//! discretisation keeps that property exactly, and time stepping uses
//! Cayley factors that are unitary in the same inner product.

mod evolve;
mod field;
mod grid;
mod observables;
mod operator;
mod protocol;

pub use evolve::{evolve, Propagator};
pub use field::{init_wavepacket, transverse_ground, PacketSpec, TransverseGround, WaveField};
pub use grid::{protocol_grid_spec, Grid2D, GridSpec, MAX_KAPPA_Y, PACKET_MARGIN};
pub use observables::{checked_fidelity, measure, Observables, FIDELITY_BEND_FRACTION, LEAKAGE_CELLS};
pub use operator::{Hamiltonian, LineMatrix};
pub use protocol::{run_protocol, ProtocolRun, LEAKAGE_WARNING};
