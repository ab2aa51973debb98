//! Scenario generation, benchmark sweeps, and figure export.
//!
//! Scenarios place a depot at the terrain center and sample targets
//! uniformly over valid terrain with a minimum pairwise separation.
//! Benchmarks time tour solvers and the full pipeline over scenario sets
//! and aggregate per-instance rows into mean/stdev records; every statistic
//! recomputes exactly from the persisted per-instance CSV.

use crate::error::{Error, Result};
use crate::planner::{plan_pipeline, MissionPlan, PipelineConfig, PlannerOptions};
use crate::segment::SegmentConfig;
use crate::terrain::TerrainGrid;
use crate::tsp::{distance_matrix, tour_length, SolverKind, TargetSet, Waypoint};
use crate::visibility::{AltitudeSet, VisibilityMap, VisibilityParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

/// Environment variable read by the CLI to size the worker pool.
pub const WORKERS_ENV: &str = "SARPLAN_WORKERS";

/// One benchmark scenario: a terrain reference plus a target set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub terrain_ref: String,
    pub targets: TargetSet,
    pub n: usize,
    pub seed: u64,
}

/// Places `n` targets uniformly over valid terrain, at least
/// `min_separation` apart, with the depot at the terrain center.
pub fn gen_scenario(
    seed: u64,
    n: usize,
    grid: &TerrainGrid,
    terrain_ref: &str,
    min_separation: f64,
) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::InvalidArgument("scenario needs at least one target".into()));
    }
    let (x0, y0, x1, y1) = grid.extent();
    let (cx, cy) = grid.center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut waypoints: Vec<Waypoint> = Vec::with_capacity(n);
    let max_attempts = 1_000 * n;
    let mut attempts = 0;
    while waypoints.len() < n {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::PlacementFailed { n, attempts });
        }
        let x = rng.gen_range(x0..x1);
        let y = rng.gen_range(y0..y1);
        let valid_cell = grid.cell_of(x, y).map(|(c, r)| !grid.is_nodata(c, r)).unwrap_or(false);
        if !valid_cell {
            continue;
        }
        if waypoints.iter().any(|w| (w.x - x).hypot(w.y - y) < min_separation) {
            continue;
        }
        waypoints.push(Waypoint { id: waypoints.len() as u32 + 1, x, y });
    }
    Ok(Scenario {
        terrain_ref: terrain_ref.to_string(),
        targets: TargetSet::new(cx, cy, waypoints)?,
        n,
        seed,
    })
}

/// Aggregate of one algorithm over one scenario size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: String,
    pub n: usize,
    pub mean_length_km: f64,
    pub std_length_km: f64,
    pub mean_time_s: f64,
    pub std_time_s: f64,
    pub instances: usize,
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// One solver run on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstanceRow {
    pub solver: String,
    pub n: usize,
    pub seed: u64,
    pub length_km: f64,
    pub time_s: f64,
}

pub const TSP_INSTANCE_CSV_HEADER: &str = "solver,n,seed,length_km,time_s";

pub fn write_tsp_instances_csv(rows: &[TspInstanceRow]) -> String {
    let mut out = String::from(TSP_INSTANCE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.solver, r.n, r.seed, r.length_km, r.time_s));
    }
    out
}

pub fn read_tsp_instances_csv(text: &str) -> Result<Vec<TspInstanceRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim() != TSP_INSTANCE_CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("unexpected header '{line}'") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::Parse { line: line_no, msg: format!("expected 5 fields, got {}", f.len()) });
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("'{s}' is not a number") })
        };
        rows.push(TspInstanceRow {
            solver: f[0].to_string(),
            n: f[1].parse().map_err(|_| Error::Parse { line: line_no, msg: "bad n".into() })?,
            seed: f[2].parse().map_err(|_| Error::Parse { line: line_no, msg: "bad seed".into() })?,
            length_km: num(f[3])?,
            time_s: num(f[4])?,
        });
    }
    Ok(rows)
}

/// Aggregates instance rows into per-(algorithm, n) records, in first-seen
/// order of the rows.
pub fn aggregate_records(rows: &[TspInstanceRow]) -> Vec<BenchRecord> {
    let mut order: Vec<(String, usize)> = Vec::new();
    let mut groups: BTreeMap<(String, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let key = (r.solver.clone(), r.n);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let entry = groups.entry(key).or_default();
        entry.0.push(r.length_km);
        entry.1.push(r.time_s);
    }
    order
        .into_iter()
        .map(|key| {
            let (lengths, times) = &groups[&key];
            let (ml, sl) = mean_std(lengths);
            let (mt, st) = mean_std(times);
            BenchRecord {
                algorithm: key.0,
                n: key.1,
                mean_length_km: ml,
                std_length_km: sl,
                mean_time_s: mt,
                std_time_s: st,
                instances: lengths.len(),
            }
        })
        .collect()
}

/// Solver-comparison table: one row per algorithm, a length/time column
/// group per scenario size.
pub fn write_bench_table_csv(records: &[BenchRecord]) -> String {
    let mut sizes: Vec<usize> = records.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut algorithms: Vec<String> = Vec::new();
    for r in records {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm.clone());
        }
    }
    let mut out = String::from("algorithm");
    for n in &sizes {
        out.push_str(&format!(
            ",mean_length_km_n{n},std_length_km_n{n},mean_time_s_n{n},std_time_s_n{n}"
        ));
    }
    out.push('\n');
    for algo in &algorithms {
        out.push_str(algo);
        for n in &sizes {
            match records.iter().find(|r| &r.algorithm == algo && r.n == *n) {
                Some(r) => out.push_str(&format!(
                    ",{},{},{},{}",
                    r.mean_length_km, r.std_length_km, r.mean_time_s, r.std_time_s
                )),
                None => out.push_str(",,,,"),
            }
        }
        out.push('\n');
    }
    out
}

/// Times every solver over the scenario set. The first run of each solver
/// is repeated untimed as a warm-up. Oversized instances a solver cannot
/// handle are recorded as missing (skipped).
pub fn bench_tsp(scenarios: &[Scenario], solvers: &[SolverKind]) -> (Vec<BenchRecord>, Vec<TspInstanceRow>) {
    let matrices: Vec<_> = scenarios.iter().map(|s| distance_matrix(&s.targets)).collect();
    let mut rows = Vec::new();
    for &solver in solvers {
        let mut warmed = false;
        for (scenario, matrix) in scenarios.iter().zip(&matrices) {
            if !warmed {
                let _ = solver.solve(matrix, scenario.seed);
                warmed = true;
            }
            let t0 = Instant::now();
            let tour = match solver.solve(matrix, scenario.seed) {
                Ok(t) => t,
                Err(_) => continue, // recorded as missing
            };
            let time_s = t0.elapsed().as_secs_f64();
            let length_km = tour_length(matrix, &tour).expect("solver returns valid tours") / 1_000.0;
            rows.push(TspInstanceRow {
                solver: solver.as_str().to_string(),
                n: scenario.n,
                seed: scenario.seed,
                length_km,
                time_s,
            });
        }
    }
    (aggregate_records(&rows), rows)
}

/// One pipeline run on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerInstanceRow {
    pub n: usize,
    pub seed: u64,
    pub length_km: f64,
    pub tour_length_km: f64,
    pub sequencing_s: f64,
    pub segments_s: f64,
    pub planning_s: f64,
    pub mean_accuracy: f64,
}

pub const PLANNER_INSTANCE_CSV_HEADER: &str =
    "n,seed,length_km,tour_length_km,sequencing_s,segments_s,planning_s,mean_accuracy";

pub fn write_planner_instances_csv(rows: &[PlannerInstanceRow]) -> String {
    let mut out = String::from(PLANNER_INSTANCE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.seed,
            r.length_km,
            r.tour_length_km,
            r.sequencing_s,
            r.segments_s,
            r.planning_s,
            r.mean_accuracy
        ));
    }
    out
}

/// Runs the full pipeline over the scenarios. Returns per-size records
/// (algorithm labeled by the tour solver), the instance rows, and the
/// overall mean accuracy.
pub fn bench_planner(
    grid: &TerrainGrid,
    scenarios: &[Scenario],
    config: &PipelineConfig,
) -> Result<(Vec<BenchRecord>, Vec<PlannerInstanceRow>, f64)> {
    let mut rows = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let (_, metrics) = plan_pipeline(grid, &scenario.targets, config)?;
        rows.push(PlannerInstanceRow {
            n: scenario.n,
            seed: scenario.seed,
            length_km: metrics.total_length_m / 1_000.0,
            tour_length_km: metrics.tour_length_m / 1_000.0,
            sequencing_s: metrics.timings.sequencing_s,
            segments_s: metrics.timings.segments_s,
            planning_s: metrics.timings.planning_s,
            mean_accuracy: metrics.mean_accuracy,
        });
    }
    let as_tsp_rows: Vec<TspInstanceRow> = rows
        .iter()
        .map(|r| TspInstanceRow {
            solver: format!("pipeline-{}", config.solver.as_str()),
            n: r.n,
            seed: r.seed,
            length_km: r.length_km,
            time_s: r.sequencing_s + r.segments_s + r.planning_s,
        })
        .collect();
    let accuracy = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.mean_accuracy).sum::<f64>() / rows.len() as f64
    };
    Ok((aggregate_records(&as_tsp_rows), rows, accuracy))
}

// Key=value configuration files.

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: idx + 1, msg: format!("expected key=value, got '{line}'") })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Builds a pipeline configuration from a key=value map, starting from the
/// defaults. Unknown keys are rejected.
pub fn pipeline_config_from_map(map: &BTreeMap<String, String>) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::default();
    let mut segment = SegmentConfig::default();
    let mut visibility = VisibilityParams::default();
    let mut planner = PlannerOptions::default();
    let mut limits = config.limits.clone();
    for (key, value) in map {
        let bad = |what: &str| Error::InvalidArgument(format!("config {key}: '{value}' is not {what}"));
        let num = || value.parse::<f64>().map_err(|_| bad("a number"));
        let count = || value.parse::<usize>().map_err(|_| bad("a count"));
        match key.as_str() {
            "standoff_radius" => segment.standoff_radius = num()?,
            "speed" => {
                segment.speed = num()?;
                limits.speed = segment.speed;
            }
            "observation_time" => segment.observation_time = num()?,
            "angle_step_deg" => segment.angle_step = num()?.to_radians(),
            "extent_half" => visibility.extent_half = num()?,
            "resolution" => visibility.resolution = count()?,
            "target_height" => visibility.target_height = num()?,
            "earth_curvature" => {
                visibility.earth_curvature = value.parse::<bool>().map_err(|_| bad("a bool"))?
            }
            "altitudes" => {
                let alts: Vec<f64> = value
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| bad("a number list")))
                    .collect::<Result<_>>()?;
                config.altitudes = AltitudeSet::new(alts)?;
            }
            "min_turn_radius" => limits.min_turn_radius = num()?,
            "max_flight_path_angle_deg" => limits.max_flight_path_angle = num()?.to_radians(),
            "depot_altitude_agl" => config.depot_altitude_agl = num()?,
            "depot_headings" => planner.depot_headings = count()?,
            "closed_tour" => planner.closed_tour = value.parse::<bool>().map_err(|_| bad("a bool"))?,
            "solver" => config.solver = SolverKind::parse(value)?,
            "seed" => config.seed = value.parse::<u64>().map_err(|_| bad("a seed"))?,
            other => return Err(Error::InvalidArgument(format!("unknown config key '{other}'"))),
        }
    }
    config.segment = segment;
    config.visibility = visibility;
    config.planner = planner;
    config.limits = limits;
    Ok(config)
}

// SVG rendering.

fn svg_color(shade: f64) -> String {
    let v = (60.0 + 160.0 * shade.clamp(0.0, 1.0)) as u8;
    format!("#{v:02x}{v:02x}{v:02x}")
}

/// Hillshade value in [0, 1] from terrain gradient, light from the
/// northwest.
fn hillshade(grid: &TerrainGrid, col: usize, row: usize) -> f64 {
    let c1 = col.min(grid.cols() - 2);
    let r1 = row.min(grid.rows() - 2);
    let dzdx = (grid.value(c1 + 1, r1) - grid.value(c1, r1)) / grid.cell_size();
    let dzdy = (grid.value(c1, r1 + 1) - grid.value(c1, r1)) / grid.cell_size();
    // Unit light direction pointing from the northwest, 45 degrees up.
    let (lx, ly, lz) = (0.5, -0.5, std::f64::consts::FRAC_1_SQRT_2);
    let norm = (dzdx * dzdx + dzdy * dzdy + 1.0).sqrt();
    let dot = (-dzdx * lx - dzdy * ly + lz) / norm;
    0.5 + 0.5 * dot.clamp(-1.0, 1.0)
}

/// Renders the terrain, visibility overlays, and plan legs as a layered SVG
/// document. Output is deterministic for identical inputs.
pub fn export_svg(plan: &MissionPlan, grid: &TerrainGrid, overlays: &[VisibilityMap]) -> String {
    use crate::planner::Leg;
    let (x0, y0, x1, y1) = grid.extent();
    let width = x1 - x0;
    let height = y1 - y0;
    let px = |x: f64| format!("{:.2}", x - x0);
    let py = |y: f64| format!("{:.2}", y1 - y);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.2} {height:.2}\">\n"
    ));
    out.push_str(
        "<style>.connector{fill:none;stroke:#d62728;stroke-width:90}\
.segment{fill:none;stroke:#e6c700;stroke-width:160}\
.target{fill:#d62728}.depot{fill:#17becf}</style>\n",
    );

    // Hillshaded terrain, downsampled to at most 160 tiles per side.
    out.push_str("<g id=\"terrain\">\n");
    let tiles_x = grid.cols().min(160);
    let tiles_y = grid.rows().min(160);
    let tile_w = width / tiles_x as f64;
    let tile_h = height / tiles_y as f64;
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let col = tx * grid.cols() / tiles_x;
            let row = ty * grid.rows() / tiles_y;
            let shade = hillshade(grid, col, row);
            let rx = tx as f64 * tile_w;
            // Row 0 is the south edge; SVG y runs down from the north edge.
            let ry = height - (ty + 1) as f64 * tile_h;
            out.push_str(&format!(
                "<rect x=\"{rx:.2}\" y=\"{ry:.2}\" width=\"{tile_w:.2}\" height=\"{tile_h:.2}\" fill=\"{}\"/>\n",
                svg_color(shade)
            ));
        }
    }
    out.push_str("</g>\n");

    // Visibility overlays, one color block per visible tile.
    out.push_str("<g id=\"visibility\" fill=\"#2ca02c\" fill-opacity=\"0.3\">\n");
    for map in overlays {
        let tiles = map.resolution.min(40);
        let step = map.resolution / tiles.max(1);
        let tile = map.cell_spacing() * step as f64;
        for ty in (0..map.resolution).step_by(step.max(1)) {
            for tx in (0..map.resolution).step_by(step.max(1)) {
                if map.value(tx, ty) == 1 {
                    let (cx, cy) = map.cell_center(tx, ty);
                    if !grid.contains(cx, cy) {
                        continue;
                    }
                    out.push_str(&format!(
                        "<rect x=\"{}\" y=\"{}\" width=\"{tile:.2}\" height=\"{tile:.2}\"/>\n",
                        px(cx - tile / 2.0),
                        py(cy + tile / 2.0),
                    ));
                }
            }
        }
    }
    out.push_str("</g>\n");

    // Trajectory legs.
    out.push_str("<g id=\"plan\">\n");
    for leg in &plan.legs {
        match leg {
            Leg::Connector { path, start, .. } => {
                let samples = crate::dubins::sample_path(path, start, grid.cell_size().max(25.0))
                    .expect("positive spacing");
                let points: Vec<String> =
                    samples.iter().map(|p| format!("{},{}", px(p.x), py(p.y))).collect();
                out.push_str(&format!(
                    "<polyline class=\"connector\" points=\"{}\"/>\n",
                    points.join(" ")
                ));
            }
            Leg::Observation { traversal } => {
                out.push_str(&format!(
                    "<polyline class=\"segment\" points=\"{},{} {},{}\"/>\n",
                    px(traversal.entry.x),
                    py(traversal.entry.y),
                    px(traversal.exit.x),
                    py(traversal.exit.y)
                ));
            }
        }
    }
    out.push_str("</g>\n");

    // Depot marker at the first leg start (terrain center otherwise).
    let (dx, dy) = plan
        .legs
        .first()
        .map(|l| {
            let p = l.start_pose();
            (p.x, p.y)
        })
        .unwrap_or_else(|| grid.center());
    out.push_str(&format!(
        "<circle class=\"depot\" cx=\"{}\" cy=\"{}\" r=\"220\"/>\n",
        px(dx),
        py(dy)
    ));
    out.push_str("</svg>\n");
    out
}
