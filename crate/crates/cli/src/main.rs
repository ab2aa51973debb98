//! Command-line frontend: terrain generation, visibility maps, segment
//! selection, policy training, tour solving, end-to-end planning, and
//! benchmark sweeps.

use clap::{Parser, Subcommand};
use sarplan_core::harness::{
    bench_planner, bench_tsp, export_svg, gen_scenario, parse_config_text, pipeline_config_from_map,
    write_bench_table_csv, write_planner_instances_csv, write_tsp_instances_csv, Scenario, WORKERS_ENV,
};
use sarplan_core::planner::{plan_pipeline, write_plan_geojson, write_plan_poses_csv};
use sarplan_core::policy::{train, write_metrics_csv, write_model, TrainConfig};
use sarplan_core::segment::{
    segment_accuracy, segment_reward, sweep_best_segment, write_segments_csv, SegmentRecord,
};
use sarplan_core::terrain::{generate_synthetic_terrain, load_terrain, save_terrain};
use sarplan_core::tsp::{
    distance_matrix, read_targets_csv, tour_length, write_tour_csv, SolverKind,
};
use sarplan_core::visibility::{
    compute_visibility_map, visibility_stack, write_visibility_meta, write_visibility_pgm,
};
use sarplan_core::{PipelineConfig, TerrainGrid};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sarplan", version, about = "Terrain-aware flight planning for side-looking radar missions")]
struct Cli {
    /// key=value configuration file overriding the built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded fractal terrain as an ESRI ASCII grid
    GenTerrain {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        cell_size: f64,
        #[arg(long)]
        max_relief: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute one binary visibility map (PGM plus .meta sidecar)
    Visibility {
        #[arg(long)]
        terrain: PathBuf,
        /// Target position as X,Y in terrain coordinates
        #[arg(long)]
        target: String,
        /// Altitude above the target's ground elevation, meters
        #[arg(long)]
        alt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select the best observation segment per target (CSV output)
    Segments {
        #[arg(long)]
        terrain: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sweep granularity in degrees
        #[arg(long)]
        angle_step: Option<f64>,
    },
    /// Train the segment-angle policy on a target set
    TrainPolicy {
        #[arg(long)]
        terrain: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        seed: u64,
        /// Model output path; the metrics log lands next to it
        #[arg(long)]
        out: PathBuf,
        /// Gradient step size
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
    },
    /// Order targets into a tour
    Sequence {
        #[arg(long)]
        targets: PathBuf,
        /// exact|nearest|farthest|random|christofides|2opt
        #[arg(long)]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline and export the mission plan
    Plan {
        #[arg(long)]
        terrain: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        /// exact|nearest|farthest|random|christofides|2opt
        #[arg(long)]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// GeoJSON output; poses CSV and metrics JSON land next to it
        #[arg(long)]
        out: PathBuf,
    },
    /// Benchmark solvers and the pipeline over generated scenarios
    Bench {
        #[arg(long)]
        terrain: PathBuf,
        /// Comma-separated scenario sizes
        #[arg(long, default_value = "20,50,100")]
        sizes: String,
        /// Instances per size
        #[arg(long, default_value_t = 10)]
        instances: usize,
        /// Comma-separated solver names
        #[arg(long, default_value = "nearest,farthest,random,christofides,2opt")]
        solvers: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Skip the (expensive) end-to-end pipeline runs
        #[arg(long)]
        skip_pipeline: bool,
    },
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn load_grid(path: &Path) -> sarplan_core::Result<TerrainGrid> {
    load_terrain(&std::fs::read_to_string(path)?)
}

fn resolve_config(path: Option<&Path>) -> sarplan_core::Result<PipelineConfig> {
    match path {
        Some(p) => {
            let map = parse_config_text(&std::fs::read_to_string(p)?)?;
            pipeline_config_from_map(&map)
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> sarplan_core::Result<()> {
    let mut config = resolve_config(cli.config.as_deref())?;
    match cli.command {
        Command::GenTerrain { seed, rows, cols, cell_size, max_relief, out } => {
            let grid = generate_synthetic_terrain(seed, rows, cols, cell_size, max_relief)?;
            std::fs::write(&out, save_terrain(&grid))?;
            println!("wrote {}x{} grid to {}", grid.cols(), grid.rows(), out.display());
        }
        Command::Visibility { terrain, target, alt, out } => {
            let grid = load_grid(&terrain)?;
            let (tx, ty) = target
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
                .ok_or_else(|| {
                    sarplan_core::Error::InvalidArgument(format!("--target expects X,Y, got '{target}'"))
                })?;
            let map = compute_visibility_map(&grid, tx, ty, 1, alt, &config.visibility)?;
            std::fs::write(&out, write_visibility_pgm(&map))?;
            let meta = sibling(&out, "meta");
            std::fs::write(&meta, write_visibility_meta(&map))?;
            println!(
                "visibility {:.1}% at {} m; map {}, sidecar {}",
                100.0 * map.fraction_visible(),
                alt,
                out.display(),
                meta.display()
            );
        }
        Command::Segments { terrain, targets, out, angle_step } => {
            let grid = load_grid(&terrain)?;
            let ts = read_targets_csv(&std::fs::read_to_string(targets)?)?;
            if let Some(deg) = angle_step {
                config.segment.angle_step = deg.to_radians();
            }
            let mut records = Vec::with_capacity(ts.waypoints.len());
            for w in &ts.waypoints {
                let stack = visibility_stack(&grid, w.x, w.y, w.id, &config.altitudes, &config.visibility)?;
                let seg = sweep_best_segment(&stack, &config.segment)?;
                let map = stack
                    .iter()
                    .find(|m| m.altitude_agl == seg.altitude_agl)
                    .expect("sweep picks an altitude from the stack");
                let reward = segment_reward(map, &seg)?;
                let accuracy = segment_accuracy(map, &seg)?;
                records.push(SegmentRecord::from_scored(&seg, reward, accuracy));
            }
            std::fs::write(&out, write_segments_csv(&records))?;
            println!("wrote {} segments to {}", records.len(), out.display());
        }
        Command::TrainPolicy { terrain, targets, episodes, seed, out, learning_rate } => {
            let grid = load_grid(&terrain)?;
            let ts = read_targets_csv(&std::fs::read_to_string(targets)?)?;
            let mut stacks = Vec::with_capacity(ts.waypoints.len());
            for w in &ts.waypoints {
                stacks.push(visibility_stack(&grid, w.x, w.y, w.id, &config.altitudes, &config.visibility)?);
            }
            let train_config = TrainConfig { episodes, seed, learning_rate, ..TrainConfig::default() };
            let (model, log) = train(&stacks, &config.segment, &train_config)?;
            std::fs::write(&out, write_model(&model))?;
            let metrics = sibling(&out, "metrics.csv");
            std::fs::write(&metrics, write_metrics_csv(&log))?;
            let last = log.last().expect("at least one episode");
            println!(
                "trained {} episodes; final mean reward {:.3}, entropy {:.3}; model {}",
                log.len(),
                last.mean_reward,
                last.entropy,
                out.display()
            );
        }
        Command::Sequence { targets, solver, seed, out } => {
            let ts = read_targets_csv(&std::fs::read_to_string(targets)?)?;
            let kind = SolverKind::parse(&solver)?;
            let matrix = distance_matrix(&ts);
            let tour = kind.solve(&matrix, seed)?;
            let length = tour_length(&matrix, &tour)?;
            std::fs::write(&out, write_tour_csv(&tour))?;
            println!("{} tour over {} targets: {:.3} km; {}", solver, ts.len(), length / 1_000.0, out.display());
        }
        Command::Plan { terrain, targets, solver, seed, out } => {
            let grid = load_grid(&terrain)?;
            let ts = read_targets_csv(&std::fs::read_to_string(targets)?)?;
            config.solver = SolverKind::parse(&solver)?;
            config.seed = seed;
            let (plan, metrics) = plan_pipeline(&grid, &ts, &config)?;
            std::fs::write(&out, write_plan_geojson(&plan, 50.0)?)?;
            let poses = sibling(&out, "poses.csv");
            std::fs::write(&poses, write_plan_poses_csv(&plan, 50.0)?)?;
            let metrics_path = sibling(&out, "metrics.json");
            std::fs::write(
                &metrics_path,
                serde_json::to_string_pretty(&metrics)
                    .map_err(|e| sarplan_core::Error::InvalidArgument(e.to_string()))?,
            )?;
            println!(
                "plan: {:.3} km over {} targets, mean accuracy {:.3}; {} + poses/metrics",
                plan.total_length / 1_000.0,
                plan.visited_targets().len(),
                metrics.mean_accuracy,
                out.display()
            );
        }
        Command::Bench { terrain, sizes, instances, solvers, seed, out, skip_pipeline } => {
            let grid = load_grid(&terrain)?;
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|_| {
                        sarplan_core::Error::InvalidArgument(format!("bad size '{t}' in --sizes"))
                    })
                })
                .collect::<sarplan_core::Result<_>>()?;
            let solver_kinds: Vec<SolverKind> = solvers
                .split(',')
                .map(|t| SolverKind::parse(t.trim()))
                .collect::<sarplan_core::Result<_>>()?;
            std::fs::create_dir_all(&out)?;

            let min_sep = 2.0 * config.segment.standoff_radius;
            let mut all_scenarios: Vec<Scenario> = Vec::new();
            for &n in &sizes {
                for k in 0..instances {
                    let scenario_seed = seed.wrapping_mul(1_000_003).wrapping_add((n * 1_000 + k) as u64);
                    all_scenarios.push(gen_scenario(scenario_seed, n, &grid, "terrain", min_sep)?);
                }
            }

            let (records, rows) = bench_tsp(&all_scenarios, &solver_kinds);
            std::fs::write(out.join("tsp_instances.csv"), write_tsp_instances_csv(&rows))?;
            std::fs::write(out.join("tsp_table.csv"), write_bench_table_csv(&records))?;
            for r in &records {
                println!(
                    "{:<14} n={:<4} length {:>10.3} +- {:>8.3} km   time {:>8.4} +- {:.4} s   ({} runs)",
                    r.algorithm, r.n, r.mean_length_km, r.std_length_km, r.mean_time_s, r.std_time_s, r.instances
                );
            }

            if !skip_pipeline {
                let (precords, prows, accuracy) = bench_planner(&grid, &all_scenarios, &config)?;
                std::fs::write(out.join("planner_instances.csv"), write_planner_instances_csv(&prows))?;
                std::fs::write(out.join("planner_table.csv"), write_bench_table_csv(&precords))?;
                println!("pipeline mean accuracy over {} instances: {:.4}", prows.len(), accuracy);
                // One rendered example per size.
                for &n in &sizes {
                    if let Some(s) = all_scenarios.iter().find(|s| s.n == n) {
                        let (plan, _) = plan_pipeline(&grid, &s.targets, &config)?;
                        let svg = export_svg(&plan, &grid, &[]);
                        std::fs::write(out.join(format!("scenario_n{n}.svg")), svg)?;
                    }
                }
            }
            println!("benchmark artifacts in {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var(WORKERS_ENV) {
        match workers.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("{WORKERS_ENV}: {e}");
                }
            }
            _ => eprintln!("{WORKERS_ENV} must be a positive integer, got '{workers}'"),
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
