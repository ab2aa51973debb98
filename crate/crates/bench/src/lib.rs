//! Shared fixtures for the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sarplan_core::segment::segment_from_angle;
use sarplan_core::planner::PlannedSegment;
use sarplan_core::tsp::{TargetSet, Waypoint};
use sarplan_core::{Pose, SegmentConfig, TerrainGrid};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

pub fn bench_terrain(seed: u64, size: usize) -> TerrainGrid {
    sarplan_core::terrain::generate_synthetic_terrain(seed, size, size, 100.0, 600.0).unwrap()
}

pub fn bench_targets(seed: u64, n: usize, span: f64) -> TargetSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut waypoints: Vec<Waypoint> = Vec::new();
    while waypoints.len() < n {
        let x = rng.gen_range(-span..span);
        let y = rng.gen_range(-span..span);
        if waypoints.iter().all(|w| (w.x - x).hypot(w.y - y) >= 3_000.0) {
            waypoints.push(Waypoint { id: waypoints.len() as u32 + 1, x, y });
        }
    }
    TargetSet::new(0.0, 0.0, waypoints).unwrap()
}

pub fn bench_pose_pairs(seed: u64, count: usize) -> Vec<(Pose, Pose)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = |rng: &mut ChaCha8Rng| {
                Pose::new(
                    rng.gen_range(-5_000.0..5_000.0),
                    rng.gen_range(-5_000.0..5_000.0),
                    rng.gen_range(500.0..3_000.0),
                    rng.gen_range(0.0..TAU),
                )
            };
            (p(&mut rng), p(&mut rng))
        })
        .collect()
}

pub fn bench_segments(targets: &TargetSet) -> BTreeMap<u32, PlannedSegment> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = SegmentConfig::default();
    targets
        .waypoints
        .iter()
        .map(|w| {
            let alpha = rng.gen_range(0.0..TAU);
            let alt = 1_000.0 + 500.0 * rng.gen_range(0..7) as f64;
            let seg = segment_from_angle(w.x, w.y, w.id, alpha, alt, &cfg).unwrap();
            (w.id, PlannedSegment { segment: seg, ground_elevation: 0.0 })
        })
        .collect()
}
