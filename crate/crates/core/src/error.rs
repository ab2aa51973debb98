//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by planning operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input (grid file, CSV, model file) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A grid or map failed a structural invariant.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A query point lies outside the terrain extent.
    #[error("point ({x}, {y}) is outside the terrain extent")]
    OutOfExtent { x: f64, y: f64 },

    /// A query touches nodata cells.
    #[error("nodata terrain at ({x}, {y})")]
    Nodata { x: f64, y: f64 },

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A segment and visibility map disagree on target or altitude.
    #[error("segment/map mismatch: {0}")]
    Mismatch(String),

    /// The exact tour solver was asked for more waypoints than it can hold.
    #[error("exact solver supports at most {max} waypoints, got {n}")]
    ExactSolverLimit { n: usize, max: usize },

    /// A toured target has no observation segment.
    #[error("no segment for target {target_id}")]
    MissingSegment { target_id: u32 },

    /// Scenario generation could not place all targets.
    #[error("failed to place {n} targets after {attempts} attempts")]
    PlacementFailed { n: usize, attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
