//! Curvature profiles, the metric factor, planar path reconstruction and
//! adiabaticity diagnostics.

mod diagnostics;
mod path;
mod profile;

pub use diagnostics::{adiabaticity_report, AdiabaticityReport, AdiabaticitySample};
pub use path::{equivalent_radius, reconstruct_path, PlanarPath};
pub use profile::{metric_factor, CurvatureProfile, Segment};
