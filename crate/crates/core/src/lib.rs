#![forbid(unsafe_code)]
// `!(x > 0.0)` in argument checks is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Flight planning for side-looking radar missions over terrain.
//!
//! The library is organized as a three-stage pipeline plus supporting
//! infrastructure:
//!
//! 1. [`tsp`] orders the targets into a tour anchored at a depot.
//! 2. [`visibility`] and [`segment`] compute terrain-aware viewsheds per
//!    target and place a straight observation leg tangent to each target's
//!    standoff circle, at the lowest altitude that maximizes visibility.
//!    [`policy`] provides a small learned predictor for the segment angle
//!    as an alternative to the exhaustive sweep.
//! 3. [`planner`] connects the legs in tour order with climb-limited Dubins
//!    curves ([`dubins`]), choosing each leg's traversal direction by
//!    best-first search over a layered graph.
//!
//! [`terrain`] holds the elevation model and line-of-sight queries;
//! [`harness`] generates scenarios and runs benchmark sweeps.

pub mod dubins;
pub mod error;
pub mod harness;
pub mod planner;
pub mod policy;
pub mod segment;
pub mod terrain;
pub mod tsp;
pub mod visibility;

pub use dubins::{DubinsPath2D, DubinsPath3D, DubinsWord, Pose, VehicleLimits};
pub use error::{Error, Result};
pub use planner::{Leg, MissionPlan, PipelineConfig, PlannerOptions};
pub use segment::{FlightSegment, SegmentConfig};
pub use terrain::{GeoPoint, TerrainGrid};
pub use tsp::{DistanceMatrix, SolverKind, TargetSet, Tour, Waypoint};
pub use visibility::{AltitudeSet, VisibilityMap, VisibilityParams};
