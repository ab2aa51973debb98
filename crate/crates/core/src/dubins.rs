//! Shortest curvature-bounded paths between oriented poses, lifted to 3D
//! with a climb-rate limit.
//!
//! The planar solver evaluates the six candidate words (LSL, RSR, LSR, RSL,
//! RLR, LRL) in closed form and keeps the shortest feasible one. The 3D lift
//! varies altitude linearly along the horizontal arc length; when the
//! required flight-path angle exceeds the limit, whole loiter circles are
//! appended at the final turn until the climb is feasible.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

/// An oriented point on the trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub alt: f64,
    /// Radians in [0, 2pi).
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, alt: f64, heading: f64) -> Self {
        Self { x, y, alt, heading: mod2pi(heading) }
    }

    pub fn horizontal_distance(&self, other: &Pose) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Aircraft motion constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleLimits {
    /// Minimum turn radius, meters.
    pub min_turn_radius: f64,
    /// Maximum flight-path angle, radians.
    pub max_flight_path_angle: f64,
    /// Cruise speed, meters per second.
    pub speed: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        Self { min_turn_radius: 500.0, max_flight_path_angle: 10f64.to_radians(), speed: 100.0 }
    }
}

impl VehicleLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_turn_radius > 0.0) || !(self.speed > 0.0) {
            return Err(Error::InvalidArgument("turn radius and speed must be positive".into()));
        }
        if !(self.max_flight_path_angle > 0.0 && self.max_flight_path_angle < PI / 2.0) {
            return Err(Error::InvalidArgument("flight-path angle limit must be in (0, pi/2)".into()));
        }
        Ok(())
    }
}

/// One of the three Dubins motion kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

/// The six Dubins path families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] =
        [DubinsWord::Lsl, DubinsWord::Rsr, DubinsWord::Lsr, DubinsWord::Rsl, DubinsWord::Rlr, DubinsWord::Lrl];

    pub fn segments(self) -> [SegmentKind; 3] {
        use DubinsWord::*;
        use SegmentKind::*;
        match self {
            Lsl => [Left, Straight, Left],
            Rsr => [Right, Straight, Right],
            Lsr => [Left, Straight, Right],
            Rsl => [Right, Straight, Left],
            Rlr => [Right, Left, Right],
            Lrl => [Left, Right, Left],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DubinsWord::Lsl => "LSL",
            DubinsWord::Rsr => "RSR",
            DubinsWord::Lsr => "LSR",
            DubinsWord::Rsl => "RSL",
            DubinsWord::Rlr => "RLR",
            DubinsWord::Lrl => "LRL",
        }
    }
}

/// Planar Dubins path: word plus the three segment lengths in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct DubinsPath2D {
    pub word: DubinsWord,
    pub segment_lengths: [f64; 3],
    pub turn_radius: f64,
    /// Sum of the segment lengths.
    pub length: f64,
}

/// Planar Dubins path with a linear climb and appended loiter circles.
#[derive(Debug, Clone, PartialEq)]
pub struct DubinsPath3D {
    pub word: DubinsWord,
    pub segment_lengths: [f64; 3],
    pub turn_radius: f64,
    /// Length of the planar word, meters.
    pub horizontal_length: f64,
    /// Full loiter circles appended at the final turn.
    pub spiral_turns: u32,
    /// Horizontal measure: `horizontal_length + spiral_turns * 2 pi r`.
    pub total_length: f64,
    pub alt_start: f64,
    pub alt_end: f64,
}

pub(crate) fn mod2pi(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

/// Normalized (by radius) segment lengths of one word, if feasible.
/// `d` is the normalized center distance, `alpha`/`beta` the headings
/// relative to the center line.
fn word_params(word: DubinsWord, alpha: f64, beta: f64, d: f64) -> Option<[f64; 3]> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let c_ab = (alpha - beta).cos();
    // Round-off can push a boundary case just outside its feasible range
    // (for example aligned poses give p_sq = -1e-16); clamp instead of
    // rejecting.
    let straight = |p_sq: f64| -> Option<f64> {
        if p_sq < -1e-9 {
            None
        } else {
            Some(p_sq.max(0.0).sqrt())
        }
    };
    let middle_arc = |t: f64| -> Option<f64> {
        if t.abs() > 1.0 + 1e-12 {
            None
        } else {
            Some(t.clamp(-1.0, 1.0))
        }
    };
    match word {
        DubinsWord::Lsl => {
            let p = straight(2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb))?;
            let tmp = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(-alpha + tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::Rsr => {
            let p = straight(2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa))?;
            let tmp = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - tmp), p, mod2pi(-beta + tmp)])
        }
        DubinsWord::Lsr => {
            let p = straight(-2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb))?;
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(-alpha + tmp), p, mod2pi(-mod2pi(beta) + tmp)])
        }
        DubinsWord::Rsl => {
            let p = straight(-2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb))?;
            let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::Rlr => {
            let tmp = middle_arc((6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0)?;
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(alpha - (ca - cb).atan2(d - sa + sb) + mod2pi(p / 2.0));
            Some([t, p, mod2pi(alpha - beta - t + mod2pi(p))])
        }
        DubinsWord::Lrl => {
            let tmp = middle_arc((6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0)?;
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(-alpha - (ca - cb).atan2(d + sa - sb) + p / 2.0);
            Some([t, p, mod2pi(mod2pi(beta) - alpha - t + mod2pi(p))])
        }
    }
}

/// All feasible words with segment lengths in meters, in the fixed word
/// order.
pub fn dubins_all_words(start: &Pose, end: &Pose, r_min: f64) -> Result<Vec<DubinsPath2D>> {
    if !(r_min > 0.0) {
        return Err(Error::InvalidArgument(format!("turn radius must be positive, got {r_min}")));
    }
    let dx = end.x - start.x;
    let dy = end.y - start.y;
    let d = dx.hypot(dy) / r_min;
    let theta = if dx == 0.0 && dy == 0.0 { 0.0 } else { dy.atan2(dx) };
    let alpha = mod2pi(start.heading - theta);
    let beta = mod2pi(end.heading - theta);

    let mut paths = Vec::with_capacity(6);
    for word in DubinsWord::ALL {
        if let Some(params) = word_params(word, alpha, beta, d) {
            // Clamp vanishing arcs so aligned poses classify cleanly.
            let lengths: Vec<f64> =
                params.iter().map(|&v| if v * r_min < 1e-9 { 0.0 } else { v * r_min }).collect();
            let lengths = [lengths[0], lengths[1], lengths[2]];
            paths.push(DubinsPath2D {
                word,
                segment_lengths: lengths,
                turn_radius: r_min,
                length: lengths.iter().sum(),
            });
        }
    }
    Ok(paths)
}

/// Shortest planar Dubins path between two poses. Ties keep the earliest
/// word in the fixed order.
pub fn dubins_shortest_2d(start: &Pose, end: &Pose, r_min: f64) -> Result<DubinsPath2D> {
    let paths = dubins_all_words(start, end, r_min)?;
    paths
        .into_iter()
        .min_by(|a, b| a.length.partial_cmp(&b.length).expect("finite lengths"))
        .ok_or_else(|| Error::InvalidArgument("no feasible Dubins word".into()))
}

/// Lifts a planar path to 3D: altitude changes linearly with horizontal arc
/// length, and whole loiter circles are appended at the final turn until the
/// climb angle is within the limit.
pub fn lift_to_3d(
    path: &DubinsPath2D,
    alt_start: f64,
    alt_end: f64,
    limits: &VehicleLimits,
) -> Result<DubinsPath3D> {
    limits.validate()?;
    let climb = (alt_end - alt_start).abs();
    let tan_max = limits.max_flight_path_angle.tan();
    let circle = TAU * limits.min_turn_radius;
    let spiral_turns = if climb <= tan_max * path.length {
        0
    } else {
        ((climb / tan_max - path.length) / circle).ceil() as u32
    };
    let total_length = path.length + spiral_turns as f64 * circle;
    Ok(DubinsPath3D {
        word: path.word,
        segment_lengths: path.segment_lengths,
        turn_radius: path.turn_radius,
        horizontal_length: path.length,
        spiral_turns,
        total_length,
        alt_start,
        alt_end,
    })
}

/// Shortest climb-feasible 3D connector between two poses.
pub fn connect_poses(start: &Pose, end: &Pose, limits: &VehicleLimits) -> Result<DubinsPath3D> {
    let path2d = dubins_shortest_2d(start, end, limits.min_turn_radius)?;
    lift_to_3d(&path2d, start.alt, end.alt, limits)
}

fn advance(x: f64, y: f64, heading: f64, kind: SegmentKind, s: f64, r: f64) -> (f64, f64, f64) {
    match kind {
        SegmentKind::Straight => (x + s * heading.cos(), y + s * heading.sin(), heading),
        SegmentKind::Left => {
            let phi = s / r;
            let cx = x - r * heading.sin();
            let cy = y + r * heading.cos();
            let h = heading + phi;
            (cx + r * h.sin(), cy - r * h.cos(), h)
        }
        SegmentKind::Right => {
            let phi = s / r;
            let cx = x + r * heading.sin();
            let cy = y - r * heading.cos();
            let h = heading - phi;
            (cx - r * h.sin(), cy + r * h.cos(), h)
        }
    }
}

/// Pose at horizontal arc length `s` along the path (loiter circles
/// included), starting from `start`.
pub fn pose_at(path: &DubinsPath3D, start: &Pose, s: f64) -> Pose {
    let s = s.clamp(0.0, path.total_length);
    let alt = if path.total_length > 0.0 {
        path.alt_start + (path.alt_end - path.alt_start) * s / path.total_length
    } else {
        path.alt_end
    };
    let kinds = path.word.segments();
    let mut remaining = s;
    let (mut x, mut y, mut h) = (start.x, start.y, start.heading);
    for (kind, &len) in kinds.iter().zip(&path.segment_lengths) {
        if remaining <= len {
            let (nx, ny, nh) = advance(x, y, h, *kind, remaining, path.turn_radius);
            return Pose::new(nx, ny, alt, nh);
        }
        let (nx, ny, nh) = advance(x, y, h, *kind, len, path.turn_radius);
        x = nx;
        y = ny;
        h = nh;
        remaining -= len;
    }
    // Loiter circles at the final turn direction.
    let spiral_kind = *kinds.last().expect("three segments");
    let (nx, ny, nh) = advance(x, y, h, spiral_kind, remaining, path.turn_radius);
    Pose::new(nx, ny, alt, nh)
}

/// End pose of the path (equals the requested end pose up to round-off).
pub fn path_end_pose(path: &DubinsPath3D, start: &Pose) -> Pose {
    pose_at(path, start, path.total_length)
}

/// Poses along the path at spacing no wider than `spacing`, first at the
/// start and last at the end pose.
pub fn sample_path(path: &DubinsPath3D, start: &Pose, spacing: f64) -> Result<Vec<Pose>> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument(format!("spacing must be positive, got {spacing}")));
    }
    let intervals = (path.total_length / spacing).ceil().max(1.0) as usize;
    Ok((0..=intervals)
        .map(|i| pose_at(path, start, path.total_length * i as f64 / intervals as f64))
        .collect())
}
