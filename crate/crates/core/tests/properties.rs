//! Randomized invariants over the core geometry and file formats.

use proptest::prelude::*;
use sarplan_core::dubins::{connect_poses, dubins_shortest_2d, Pose, VehicleLimits};
use sarplan_core::segment::{segment_from_angle, SegmentConfig};
use sarplan_core::terrain::{load_terrain, save_terrain, TerrainGrid, DEFAULT_NODATA};
use sarplan_core::tsp::{distance_matrix, tour_length, TargetSet, Tour, Waypoint};
use std::f64::consts::TAU;

proptest! {
    #[test]
    fn terrain_save_load_is_identity(
        cols in 2usize..12,
        rows in 2usize..12,
        cell in 1.0f64..500.0,
        seed in any::<u64>(),
    ) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2_000.0 - 500.0
        };
        let elevations: Vec<f64> = (0..rows * cols).map(|_| next()).collect();
        let grid = TerrainGrid::new(cols, rows, cell, -350.0, 420.0, elevations, DEFAULT_NODATA).unwrap();
        let back = load_terrain(&save_terrain(&grid)).unwrap();
        prop_assert_eq!(grid, back);
    }

    #[test]
    fn dubins_length_dominates_chord(
        sx in -5_000.0f64..5_000.0, sy in -5_000.0f64..5_000.0, sh in 0.0f64..TAU,
        ex in -5_000.0f64..5_000.0, ey in -5_000.0f64..5_000.0, eh in 0.0f64..TAU,
        r in 50.0f64..1_500.0,
    ) {
        let start = Pose::new(sx, sy, 0.0, sh);
        let end = Pose::new(ex, ey, 0.0, eh);
        let path = dubins_shortest_2d(&start, &end, r).unwrap();
        prop_assert!(path.length >= start.horizontal_distance(&end) - 1e-9);
    }

    #[test]
    fn lifted_paths_respect_the_climb_limit(
        sx in -5_000.0f64..5_000.0, sy in -5_000.0f64..5_000.0, sh in 0.0f64..TAU,
        ex in -5_000.0f64..5_000.0, ey in -5_000.0f64..5_000.0, eh in 0.0f64..TAU,
        alt_start in 0.0f64..4_000.0, alt_end in 0.0f64..4_000.0,
    ) {
        let limits = VehicleLimits::default();
        let start = Pose::new(sx, sy, alt_start, sh);
        let end = Pose::new(ex, ey, alt_end, eh);
        let path = connect_poses(&start, &end, &limits).unwrap();
        let tan = limits.max_flight_path_angle.tan();
        prop_assert!((alt_end - alt_start).abs() <= tan * path.total_length + 1e-9);
        prop_assert!(
            (path.total_length
                - (path.horizontal_length
                    + path.spiral_turns as f64 * TAU * limits.min_turn_radius))
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn segments_stay_tangent_to_the_standoff_circle(
        tx in -30_000.0f64..30_000.0,
        ty in -30_000.0f64..30_000.0,
        alpha in 0.0f64..TAU,
        radius in 100.0f64..5_000.0,
        speed in 30.0f64..300.0,
        time in 5.0f64..120.0,
    ) {
        let cfg = SegmentConfig {
            standoff_radius: radius,
            speed,
            observation_time: time,
            ..SegmentConfig::default()
        };
        let seg = segment_from_angle(tx, ty, 1, alpha, 1_000.0, &cfg).unwrap();
        let (dx, dy) = seg.direction();
        let tangency = ((tx - seg.endpoint_a.x) * dy - (ty - seg.endpoint_a.y) * dx).abs();
        prop_assert!((tangency - radius).abs() / radius < 1e-6);
        let d = seg.endpoint_a.horizontal_distance(&seg.endpoint_b);
        prop_assert!((d - seg.length).abs() / seg.length < 1e-6);
    }

    #[test]
    fn tour_lengths_compose_and_reverse(seed in any::<u64>()) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 20_000.0 - 10_000.0
        };
        let waypoints: Vec<Waypoint> =
            (1..=6).map(|id| Waypoint { id, x: next(), y: next() }).collect();
        let ts = TargetSet::new(next(), next(), waypoints).unwrap();
        let m = distance_matrix(&ts);
        let order: Vec<u32> = (1..=6).collect();
        let open = tour_length(&m, &Tour { order: order.clone(), closed: false }).unwrap();
        // Reversing an open chain keeps its length.
        let mut reversed = order.clone();
        reversed.reverse();
        let rev = tour_length(&m, &Tour { order: reversed, closed: false }).unwrap();
        prop_assert!((open - rev).abs() <= 1e-9 * open.max(1.0));
        // Closing adds exactly the two depot legs.
        let closed = tour_length(&m, &Tour { order: order.clone(), closed: true }).unwrap();
        let first = m.index_of(order[0]).unwrap();
        let last = m.index_of(order[5]).unwrap();
        prop_assert!(
            (closed - (open + m.dist(0, first) + m.dist(last, 0))).abs() <= 1e-9 * closed.max(1.0)
        );
    }
}
