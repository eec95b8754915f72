use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed scenario file: {0}")]
    Parse(String),

    #[error("invalid value for `{key}`: {constraint}")]
    Validation { key: String, constraint: String },

    #[error("malformed table: {0}")]
    Table(String),

    #[error("step too coarse: ds = {ds} exceeds s_f/100 = {limit}")]
    StepTooCoarse { ds: f64, limit: f64 },

    #[error("path is not a 90 degree connector: entry tangent {entry} rad, exit tangent {exit} rad")]
    TangentMismatch { entry: f64, exit: f64 },

    #[error("t = {t} outside [0, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },

    #[error(
        "infeasible design: transverse energy {transverse} exceeds total kinetic energy {total}; \
         increase the incident velocity or lower the curvature"
    )]
    Infeasible { transverse: f64, total: f64 },

    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    #[error("root finder did not converge for {what} after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("curvature branch lost at t = {t}: no root of the force balance in [{kappa_lo}, {kappa_hi}]")]
    BranchLost { t: f64, kappa_lo: f64, kappa_hi: f64 },

    #[error("metric singularity reached at t = {t}, s = {s}: h = {h}")]
    MetricSingularity { t: f64, s: f64, h: f64 },

    #[error("particle reflected at t = {t}, s = {s} (sdot = {sdot})")]
    Reflected { t: f64, s: f64, sdot: f64 },

    #[error("integration exceeded the time cap {t_cap} before reaching s = {s_stop}")]
    Timeout { t_cap: f64, s_stop: f64 },

    #[error("trajectory has no exit record")]
    NoExit,

    #[error("sweep sample {index} (v = {velocity}) failed: {source}")]
    Sample {
        index: usize,
        velocity: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("metric too singular: kappa_max * y_max = {product:.3} > 0.9; reduce the transverse half-width or the peak curvature")]
    MetricTooSingular { product: f64 },

    #[error("wave packet does not fit: {0}")]
    Support(String),

    #[error("tridiagonal solve broke down at {location} (pivot {pivot:e})")]
    SolveBreakdown { location: String, pivot: f64 },

    #[error("fidelity not yet valid: {fraction:.3e} of the packet is still inside the bend")]
    NotYetValid { fraction: f64 },

    #[error("{0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn validation(key: &str, constraint: impl Into<String>) -> Self {
        Error::Validation {
            key: key.to_string(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Validation { .. } | Error::Table(_) | Error::Precondition(_)
        )
    }
}
