//! Straight observation legs tangent to a target's standoff circle.
//!
//! A segment is parameterized by the angle `alpha` of the standoff-circle
//! radius perpendicular to it: the tangent point at `target + R(cos a, sin a)`
//! is the segment midpoint, and the leg runs perpendicular to that radius
//! with length speed x observation time. Segments are scored by summing
//! visibility-map values at evenly spaced sample points, and the sweep
//! selector picks, over a full angle grid at every altitude, the lowest
//! altitude reaching the best score.

use crate::error::{Error, Result};
use crate::terrain::GeoPoint;
use crate::visibility::VisibilityMap;
use std::f64::consts::{PI, TAU};

/// Geometry and sweep configuration for observation segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentConfig {
    /// Minimum approach distance to the target, meters.
    pub standoff_radius: f64,
    /// Aircraft speed, meters per second.
    pub speed: f64,
    /// Observation duration, seconds.
    pub observation_time: f64,
    /// Angle grid granularity for the sweep, radians.
    pub angle_step: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self { standoff_radius: 1_500.0, speed: 100.0, observation_time: 30.0, angle_step: PI / 180.0 }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.standoff_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "standoff_radius must be positive, got {}",
                self.standoff_radius
            )));
        }
        if !(self.speed > 0.0) || !(self.observation_time > 0.0) {
            return Err(Error::InvalidArgument("speed and observation_time must be positive".into()));
        }
        if !(self.angle_step > 0.0 && self.angle_step <= PI / 18.0) {
            return Err(Error::InvalidArgument(format!(
                "angle_step must be in (0, pi/18], got {}",
                self.angle_step
            )));
        }
        Ok(())
    }

    /// Segment length: speed x observation time.
    pub fn segment_length(&self) -> f64 {
        self.speed * self.observation_time
    }
}

/// A straight observation leg at a fixed altitude, tangent to the standoff
/// circle of its target.
///
/// Endpoint altitudes are stored as meters above the target's ground
/// elevation, matching `altitude_agl`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightSegment {
    pub target_id: u32,
    /// Orientation of the radius perpendicular to the leg, in [0, 2pi).
    pub angle_alpha: f64,
    /// Meters above the target's ground elevation.
    pub altitude_agl: f64,
    pub endpoint_a: GeoPoint,
    pub endpoint_b: GeoPoint,
    pub length: f64,
}

impl FlightSegment {
    /// Unit direction from endpoint A to endpoint B.
    pub fn direction(&self) -> (f64, f64) {
        (
            (self.endpoint_b.x - self.endpoint_a.x) / self.length,
            (self.endpoint_b.y - self.endpoint_a.y) / self.length,
        )
    }

    /// Midpoint of the leg (the tangent point on the standoff circle).
    pub fn midpoint(&self) -> (f64, f64) {
        (0.5 * (self.endpoint_a.x + self.endpoint_b.x), 0.5 * (self.endpoint_a.y + self.endpoint_b.y))
    }

    /// Evenly spaced sample points from endpoint A to endpoint B inclusive,
    /// at intervals no wider than `spacing`.
    pub fn sample_points(&self, spacing: f64) -> Vec<(f64, f64)> {
        let intervals = (self.length / spacing).ceil().max(1.0) as usize;
        (0..=intervals)
            .map(|i| {
                let t = i as f64 / intervals as f64;
                (
                    self.endpoint_a.x + t * (self.endpoint_b.x - self.endpoint_a.x),
                    self.endpoint_a.y + t * (self.endpoint_b.y - self.endpoint_a.y),
                )
            })
            .collect()
    }
}

/// Builds the observation leg for `alpha` at the given altitude.
///
/// Midpoint `m = target + R(cos a, sin a)`, direction `(-sin a, cos a)`,
/// endpoints `m -/+ (L/2) d`.
pub fn segment_from_angle(
    target_x: f64,
    target_y: f64,
    target_id: u32,
    alpha: f64,
    altitude_agl: f64,
    config: &SegmentConfig,
) -> Result<FlightSegment> {
    config.validate()?;
    if !(0.0..TAU).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must be in [0, 2pi), got {alpha}")));
    }
    if !(altitude_agl > 0.0) {
        return Err(Error::InvalidArgument(format!("altitude must be positive, got {altitude_agl}")));
    }
    let length = config.segment_length();
    let (sin_a, cos_a) = alpha.sin_cos();
    let mx = target_x + config.standoff_radius * cos_a;
    let my = target_y + config.standoff_radius * sin_a;
    let (dx, dy) = (-sin_a, cos_a);
    let half = 0.5 * length;
    Ok(FlightSegment {
        target_id,
        angle_alpha: alpha,
        altitude_agl,
        endpoint_a: GeoPoint::new(mx - half * dx, my - half * dy, altitude_agl),
        endpoint_b: GeoPoint::new(mx + half * dx, my + half * dy, altitude_agl),
        length,
    })
}

fn check_match(vis: &VisibilityMap, seg: &FlightSegment) -> Result<()> {
    if vis.target_id != seg.target_id {
        return Err(Error::Mismatch(format!(
            "segment targets {} but map targets {}",
            seg.target_id, vis.target_id
        )));
    }
    if vis.altitude_agl != seg.altitude_agl {
        return Err(Error::Mismatch(format!(
            "segment altitude {} but map altitude {}",
            seg.altitude_agl, vis.altitude_agl
        )));
    }
    Ok(())
}

/// Sum of visibility values at sample points spaced at the map's cell
/// spacing, endpoints inclusive. Samples falling off the map count 0.
pub fn segment_reward(vis: &VisibilityMap, seg: &FlightSegment) -> Result<u32> {
    check_match(vis, seg)?;
    let spacing = vis.cell_spacing();
    Ok(seg.sample_points(spacing).iter().map(|&(x, y)| vis.sample(x, y) as u32).sum())
}

/// Number of sample points used by [`segment_reward`] for this map/segment.
pub fn segment_sample_count(vis: &VisibilityMap, seg: &FlightSegment) -> usize {
    (seg.length / vis.cell_spacing()).ceil().max(1.0) as usize + 1
}

/// Fraction of segment sample points with clear line of sight.
pub fn segment_accuracy(vis: &VisibilityMap, seg: &FlightSegment) -> Result<f64> {
    let reward = segment_reward(vis, seg)?;
    Ok(reward as f64 / segment_sample_count(vis, seg) as f64)
}

/// The angle grid swept by [`sweep_best_segment`]: multiples of
/// `config.angle_step` in [0, 2pi).
pub fn sweep_angles(config: &SegmentConfig) -> Vec<f64> {
    let count = (TAU / config.angle_step).ceil() as usize;
    (0..count).map(|k| k as f64 * config.angle_step).filter(|a| *a < TAU).collect()
}

/// Exhaustive selector over the (angle x altitude) grid.
///
/// Scores every angle at every altitude, finds the best reward overall, and
/// returns the segment at the lowest altitude attaining it, breaking ties
/// toward the smallest angle. The target position and id come from the maps.
pub fn sweep_best_segment(stack: &[VisibilityMap], config: &SegmentConfig) -> Result<FlightSegment> {
    config.validate()?;
    if stack.is_empty() {
        return Err(Error::InvalidArgument("visibility stack is empty".into()));
    }
    if stack.windows(2).any(|w| w[1].altitude_agl <= w[0].altitude_agl) {
        return Err(Error::InvalidArgument("stack altitudes must be strictly increasing".into()));
    }
    let target_x = stack[0].center_x;
    let target_y = stack[0].center_y;
    let target_id = stack[0].target_id;
    let angles = sweep_angles(config);

    // Best (reward, angle) per altitude; scanning angles in ascending order
    // with a strict comparison resolves ties to the smallest angle.
    let mut per_altitude: Vec<(u32, f64)> = Vec::with_capacity(stack.len());
    for map in stack {
        let mut best_reward = 0u32;
        let mut best_angle = angles[0];
        let mut first = true;
        for &alpha in &angles {
            let seg = segment_from_angle(target_x, target_y, target_id, alpha, map.altitude_agl, config)?;
            let reward = segment_reward(map, &seg)?;
            if first || reward > best_reward {
                best_reward = reward;
                best_angle = alpha;
                first = false;
            }
        }
        per_altitude.push((best_reward, best_angle));
    }
    let global_best = per_altitude.iter().map(|&(r, _)| r).max().expect("nonempty stack");
    let (chosen_idx, &(_, chosen_angle)) = per_altitude
        .iter()
        .enumerate()
        .find(|(_, &(r, _))| r == global_best)
        .expect("some altitude attains the maximum");
    segment_from_angle(target_x, target_y, target_id, chosen_angle, stack[chosen_idx].altitude_agl, config)
}

/// Best segment with the angle held fixed: scores `alpha` at every altitude
/// and applies the lowest-altitude-best-reward rule. A baseline for
/// comparing angle selectors.
pub fn best_segment_for_angle(
    stack: &[VisibilityMap],
    alpha: f64,
    config: &SegmentConfig,
) -> Result<FlightSegment> {
    if stack.is_empty() {
        return Err(Error::InvalidArgument("visibility stack is empty".into()));
    }
    let mut scored = Vec::with_capacity(stack.len());
    for map in stack {
        let seg = segment_from_angle(map.center_x, map.center_y, map.target_id, alpha, map.altitude_agl, config)?;
        let reward = segment_reward(map, &seg)?;
        scored.push((reward, seg));
    }
    let best = scored.iter().map(|(r, _)| *r).max().expect("nonempty stack");
    Ok(scored.into_iter().find(|(r, _)| *r == best).expect("max exists").1)
}

/// One scored segment row for CSV emission.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub target_id: u32,
    pub alpha_deg: f64,
    pub altitude_m: f64,
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
    pub reward: u32,
    pub accuracy: f64,
}

impl SegmentRecord {
    pub fn from_scored(seg: &FlightSegment, reward: u32, accuracy: f64) -> Self {
        Self {
            target_id: seg.target_id,
            alpha_deg: seg.angle_alpha.to_degrees(),
            altitude_m: seg.altitude_agl,
            ax: seg.endpoint_a.x,
            ay: seg.endpoint_a.y,
            bx: seg.endpoint_b.x,
            by: seg.endpoint_b.y,
            reward,
            accuracy,
        }
    }
}

pub const SEGMENT_CSV_HEADER: &str = "target_id,alpha_deg,altitude_m,ax,ay,bx,by,reward,accuracy";

pub fn write_segments_csv(records: &[SegmentRecord]) -> String {
    let mut out = String::from(SEGMENT_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.target_id, r.alpha_deg, r.altitude_m, r.ax, r.ay, r.bx, r.by, r.reward, r.accuracy
        ));
    }
    out
}

pub fn read_segments_csv(text: &str) -> Result<Vec<SegmentRecord>> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim() != SEGMENT_CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("unexpected header '{line}'") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("'{}' is not a number", fields[i]) })
        };
        records.push(SegmentRecord {
            target_id: fields[0]
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("'{}' is not an id", fields[0]) })?,
            alpha_deg: num(1)?,
            altitude_m: num(2)?,
            ax: num(3)?,
            ay: num(4)?,
            bx: num(5)?,
            by: num(6)?,
            reward: fields[7]
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("'{}' is not a count", fields[7]) })?,
            accuracy: num(8)?,
        });
    }
    Ok(records)
}
