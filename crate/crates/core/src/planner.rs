//! Connects per-target observation legs in tour order with climb-limited
//! Dubins connectors, choosing each leg's traversal direction by best-first
//! search over a layered graph.
//!
//! Stage 0 is the depot departure, stage i the two directed traversals of
//! the i-th toured segment, and the final stage the depot return. Edge
//! weights are 3D Dubins connector lengths between the exit pose of one
//! stage and the entry pose of the next. The aircraft flies every segment
//! straight, so entry and exit headings equal the segment direction and the
//! connectors absorb all turning. The depot heading is free: a fixed fan of
//! candidate headings is tried and the best kept per depot leg.

use crate::dubins::{connect_poses, sample_path, DubinsPath3D, Pose, VehicleLimits};
use crate::error::{Error, Result};
use crate::segment::{segment_accuracy, segment_reward, sweep_best_segment, FlightSegment, SegmentConfig};
use crate::terrain::TerrainGrid;
use crate::tsp::{distance_matrix, tour_length, SolverKind, TargetSet, Tour};
use crate::visibility::{visibility_stack, AltitudeSet, VisibilityParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::time::Instant;

/// Search and depot-modeling options.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerOptions {
    /// Candidate depot headings, uniformly spaced.
    pub depot_headings: usize,
    /// Return to the depot after the last segment.
    pub closed_tour: bool,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self { depot_headings: 8, closed_tour: true }
    }
}

/// A segment with the ground elevation at its target, fixing the absolute
/// flight altitude of the observation leg.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedSegment {
    pub segment: FlightSegment,
    pub ground_elevation: f64,
}

impl PlannedSegment {
    pub fn absolute_altitude(&self) -> f64 {
        self.ground_elevation + self.segment.altitude_agl
    }
}

/// One directed traversal of a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Traversal {
    pub target_id: u32,
    pub reversed: bool,
    pub entry: Pose,
    pub exit: Pose,
    pub length: f64,
}

fn traversal(planned: &PlannedSegment, reversed: bool) -> Traversal {
    let seg = &planned.segment;
    let alt = planned.absolute_altitude();
    let (a, b) = if reversed {
        (&seg.endpoint_b, &seg.endpoint_a)
    } else {
        (&seg.endpoint_a, &seg.endpoint_b)
    };
    let heading = (b.y - a.y).atan2(b.x - a.x);
    Traversal {
        target_id: seg.target_id,
        reversed,
        entry: Pose::new(a.x, a.y, alt, heading),
        exit: Pose::new(b.x, b.y, alt, heading),
        length: seg.length,
    }
}

/// A depot leg: connector cost plus the depot heading that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepotEdge {
    pub cost: f64,
    pub heading: f64,
}

/// Stage graph over directed segment traversals.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredGraph {
    pub depot: Pose,
    pub stages: Vec<[Traversal; 2]>,
    /// Depot -> first stage, per direction of the first stage.
    pub entry: [DepotEdge; 2],
    /// `middle[i][from][to]` joins stage i (direction `from`) to stage i+1.
    pub middle: Vec<[[f64; 2]; 2]>,
    /// Last stage -> depot, per direction of the last stage.
    pub exit: [DepotEdge; 2],
    pub closed: bool,
}

impl LayeredGraph {
    /// Depot node, two nodes per stage, and the depot-return node.
    pub fn node_count(&self) -> usize {
        2 * self.stages.len() + if self.closed { 2 } else { 1 }
    }

    pub fn edge_count(&self) -> usize {
        2 + 4 * (self.stages.len() - 1) + if self.closed { 2 } else { 0 }
    }
}

fn best_depot_edge(
    depot: &Pose,
    headings: usize,
    limits: &VehicleLimits,
    to: Option<&Pose>,
    from: Option<&Pose>,
) -> Result<DepotEdge> {
    let mut best: Option<DepotEdge> = None;
    for k in 0..headings {
        let heading = crate::dubins::mod2pi(depot.heading + TAU * k as f64 / headings as f64);
        let pose = Pose::new(depot.x, depot.y, depot.alt, heading);
        let path = match (to, from) {
            (Some(target), None) => connect_poses(&pose, target, limits)?,
            (None, Some(source)) => connect_poses(source, &pose, limits)?,
            _ => unreachable!("exactly one endpoint is the depot"),
        };
        if best.is_none_or(|b| path.total_length < b.cost) {
            best = Some(DepotEdge { cost: path.total_length, heading });
        }
    }
    Ok(best.expect("at least one heading candidate"))
}

/// Builds the layered graph for a tour. Every toured target must have a
/// segment; edge weights are 3D Dubins connector lengths.
pub fn build_layer_graph(
    tour: &Tour,
    segments: &BTreeMap<u32, PlannedSegment>,
    depot: &Pose,
    limits: &VehicleLimits,
    options: &PlannerOptions,
) -> Result<LayeredGraph> {
    limits.validate()?;
    if tour.order.is_empty() {
        return Err(Error::InvalidArgument("tour is empty".into()));
    }
    if options.depot_headings == 0 {
        return Err(Error::InvalidArgument("need at least one depot heading".into()));
    }
    let mut stages = Vec::with_capacity(tour.order.len());
    for &id in &tour.order {
        let planned = segments.get(&id).ok_or(Error::MissingSegment { target_id: id })?;
        stages.push([traversal(planned, false), traversal(planned, true)]);
    }

    let entry = [
        best_depot_edge(depot, options.depot_headings, limits, Some(&stages[0][0].entry), None)?,
        best_depot_edge(depot, options.depot_headings, limits, Some(&stages[0][1].entry), None)?,
    ];
    let middle: Vec<[[f64; 2]; 2]> = (0..stages.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut block = [[0.0; 2]; 2];
            for (from, row) in block.iter_mut().enumerate() {
                for (to, cost) in row.iter_mut().enumerate() {
                    *cost = connect_poses(&stages[i][from].exit, &stages[i + 1][to].entry, limits)
                        .map(|p| p.total_length)
                        .expect("valid poses connect");
                }
            }
            block
        })
        .collect();
    let last = stages.len() - 1;
    let exit = if options.closed_tour {
        [
            best_depot_edge(depot, options.depot_headings, limits, None, Some(&stages[last][0].exit))?,
            best_depot_edge(depot, options.depot_headings, limits, None, Some(&stages[last][1].exit))?,
        ]
    } else {
        [DepotEdge { cost: 0.0, heading: depot.heading }; 2]
    };
    Ok(LayeredGraph { depot: *depot, stages, entry, middle, exit, closed: options.closed_tour })
}

/// One leg of the mission trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Leg {
    Connector { path: DubinsPath3D, start: Pose, end: Pose },
    Observation { traversal: Traversal },
}

impl Leg {
    pub fn length(&self) -> f64 {
        match self {
            Leg::Connector { path, .. } => path.total_length,
            Leg::Observation { traversal } => traversal.length,
        }
    }

    pub fn start_pose(&self) -> Pose {
        match self {
            Leg::Connector { start, .. } => *start,
            Leg::Observation { traversal } => traversal.entry,
        }
    }

    pub fn end_pose(&self) -> Pose {
        match self {
            Leg::Connector { end, .. } => *end,
            Leg::Observation { traversal } => traversal.exit,
        }
    }
}

/// Alternating connectors and observation legs covering the whole tour.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub legs: Vec<Leg>,
    /// Per stage: was the segment flown from endpoint B to endpoint A?
    pub directions: Vec<bool>,
    pub total_length: f64,
    pub closed: bool,
}

impl MissionPlan {
    pub fn connector_length(&self) -> f64 {
        self.legs.iter().filter(|l| matches!(l, Leg::Connector { .. })).map(Leg::length).sum()
    }

    pub fn observation_length(&self) -> f64 {
        self.legs.iter().filter(|l| matches!(l, Leg::Observation { .. })).map(Leg::length).sum()
    }

    /// Target ids in visit order.
    pub fn visited_targets(&self) -> Vec<u32> {
        self.legs
            .iter()
            .filter_map(|l| match l {
                Leg::Observation { traversal } => Some(traversal.target_id),
                _ => None,
            })
            .collect()
    }
}

/// Continuity and bookkeeping checks on an assembled plan.
pub fn validate_plan(plan: &MissionPlan) -> Result<()> {
    for pair in plan.legs.windows(2) {
        let end = pair[0].end_pose();
        let start = pair[1].start_pose();
        if (end.x - start.x).abs() > 1e-6
            || (end.y - start.y).abs() > 1e-6
            || (end.alt - start.alt).abs() > 1e-6
        {
            return Err(Error::InvalidArgument(format!(
                "legs are discontinuous at ({}, {})",
                end.x, end.y
            )));
        }
        let dh = (end.heading - start.heading + std::f64::consts::PI).rem_euclid(TAU)
            - std::f64::consts::PI;
        if dh.abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("heading jump of {dh} between legs")));
        }
    }
    let mut ids = plan.visited_targets();
    let n = ids.len();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != n {
        return Err(Error::InvalidArgument("a target is visited more than once".into()));
    }
    let leg_sum: f64 = plan.legs.iter().map(Leg::length).sum();
    if (leg_sum - plan.total_length).abs() > 1e-6 * plan.total_length.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "leg sum {leg_sum} disagrees with total {}",
            plan.total_length
        )));
    }
    Ok(())
}

/// Diagnostics from one search run.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct SearchAudit {
    pub expansions: usize,
    /// Expanded states whose heuristic exceeded the true remaining optimal
    /// mission length (connectors plus segments still to fly).
    pub admissibility_violations: usize,
    /// Pops whose f-value decreased relative to an earlier pop.
    pub monotonicity_violations: usize,
}

/// Best-first search over the layered graph (f = connector cost so far plus
/// the waypoint-chain heuristic), run to frontier exhaustion so the returned
/// plan is the exact optimum over all direction assignments; length ties
/// prefer the lexicographically smaller direction string (forward < reverse
/// stage by stage). `waypoints` are the toured target positions in stage
/// order, feeding the heuristic. The audit reports heuristic behavior.
pub fn astar_plan_with_audit(
    graph: &LayeredGraph,
    waypoints: &[(f64, f64)],
    limits: &VehicleLimits,
) -> Result<(MissionPlan, SearchAudit)> {
    let n = graph.stages.len();
    if waypoints.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} waypoint positions for {n} stages",
            waypoints.len()
        )));
    }

    // Heuristic: straight-line distances along the remaining waypoint chain.
    // h_chain[k] applies to a state that has finished stage k.
    let mut h_chain = vec![0.0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        let (ax, ay) = waypoints[k];
        let (bx, by) = waypoints[k + 1];
        h_chain[k] = h_chain[k + 1] + (ax - bx).hypot(ay - by);
    }

    // True remaining optimal cost (connectors plus segments still to fly)
    // from each state, for the admissibility audit.
    let mut remaining = vec![[0.0f64; 2]; n];
    for (slot, edge) in remaining[n - 1].iter_mut().zip(&graph.exit) {
        *slot = if graph.closed { edge.cost } else { 0.0 };
    }
    for k in (0..n - 1).rev() {
        for d in 0..2 {
            let via = |to: usize| {
                graph.middle[k][d][to] + graph.stages[k + 1][to].length + remaining[k + 1][to]
            };
            remaining[k][d] = via(0).min(via(1));
        }
    }

    // Best-first over (stage, direction); the frontier is exhausted so an
    // optimistic heuristic cannot cost optimality.
    #[derive(Clone, PartialEq)]
    struct Item {
        f: f64,
        g: f64,
        stage: usize,
        dir: usize,
        dirs: Vec<bool>,
    }
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            other
                .f
                .partial_cmp(&self.f)
                .expect("finite costs")
                .then_with(|| other.dirs.cmp(&self.dirs))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    // Best (g, direction string) known for a node.
    type NodeBest = Option<(f64, Vec<bool>)>;
    let mut audit = SearchAudit::default();
    let mut best_goal: NodeBest = None;
    let mut best_at: Vec<[NodeBest; 2]> = vec![[None, None]; n];
    let mut heap = std::collections::BinaryHeap::new();
    for dir in 0..2 {
        heap.push(Item {
            f: graph.entry[dir].cost + h_chain[0],
            g: graph.entry[dir].cost,
            stage: 0,
            dir,
            dirs: vec![dir == 1],
        });
    }
    let mut last_f = f64::NEG_INFINITY;
    while let Some(item) = heap.pop() {
        if item.f + 1e-12 < last_f {
            audit.monotonicity_violations += 1;
        }
        last_f = last_f.max(item.f);
        let better = match &best_at[item.stage][item.dir] {
            Some((g, dirs)) => item.g < *g || (item.g == *g && item.dirs < *dirs),
            None => true,
        };
        if !better {
            continue;
        }
        best_at[item.stage][item.dir] = Some((item.g, item.dirs.clone()));
        audit.expansions += 1;
        if h_chain[item.stage]
            > remaining[item.stage][item.dir] + 1e-6
        {
            audit.admissibility_violations += 1;
        }
        if item.stage == n - 1 {
            let goal_g = item.g + if graph.closed { graph.exit[item.dir].cost } else { 0.0 };
            let better_goal = match &best_goal {
                Some((g, dirs)) => goal_g < *g || (goal_g == *g && item.dirs < *dirs),
                None => true,
            };
            if better_goal {
                best_goal = Some((goal_g, item.dirs.clone()));
            }
            continue;
        }
        for to in 0..2 {
            let g = item.g + graph.middle[item.stage][item.dir][to];
            let mut dirs = item.dirs.clone();
            dirs.push(to == 1);
            heap.push(Item { f: g + h_chain[item.stage + 1], g, stage: item.stage + 1, dir: to, dirs });
        }
    }
    let (_, directions) = best_goal.ok_or_else(|| Error::InvalidArgument("search found no plan".into()))?;
    let plan = assemble_plan(graph, limits, &directions)?;
    Ok((plan, audit))
}

/// Search entry point; see [`astar_plan_with_audit`].
pub fn astar_plan(
    graph: &LayeredGraph,
    waypoints: &[(f64, f64)],
    limits: &VehicleLimits,
) -> Result<MissionPlan> {
    astar_plan_with_audit(graph, waypoints, limits).map(|(plan, _)| plan)
}

/// Builds the concrete legs for a direction assignment and totals their
/// lengths in stage order.
pub fn assemble_plan(
    graph: &LayeredGraph,
    limits: &VehicleLimits,
    directions: &[bool],
) -> Result<MissionPlan> {
    let n = graph.stages.len();
    if directions.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} directions for {n} stages",
            directions.len()
        )));
    }
    let mut legs = Vec::with_capacity(2 * n + 1);
    let mut total = 0.0;
    let first_dir = usize::from(directions[0]);
    let depot_out = Pose::new(graph.depot.x, graph.depot.y, graph.depot.alt, graph.entry[first_dir].heading);
    let first_entry = graph.stages[0][first_dir].entry;
    let path = connect_poses(&depot_out, &first_entry, limits)?;
    total += path.total_length;
    legs.push(Leg::Connector { path, start: depot_out, end: first_entry });
    for k in 0..n {
        let dir = usize::from(directions[k]);
        let traversal = graph.stages[k][dir].clone();
        legs.push(Leg::Observation { traversal });
        if k + 1 < n {
            let to = usize::from(directions[k + 1]);
            let from_pose = graph.stages[k][dir].exit;
            let to_pose = graph.stages[k + 1][to].entry;
            let path = connect_poses(&from_pose, &to_pose, limits)?;
            total += path.total_length;
            legs.push(Leg::Connector { path, start: from_pose, end: to_pose });
        }
    }
    if graph.closed {
        let last_dir = usize::from(directions[n - 1]);
        let from_pose = graph.stages[n - 1][last_dir].exit;
        let depot_in =
            Pose::new(graph.depot.x, graph.depot.y, graph.depot.alt, graph.exit[last_dir].heading);
        let path = connect_poses(&from_pose, &depot_in, limits)?;
        total += path.total_length;
        legs.push(Leg::Connector { path, start: from_pose, end: depot_in });
    }
    for (stage, &reversed) in graph.stages.iter().zip(directions) {
        total += stage[usize::from(reversed)].length;
    }
    let plan = MissionPlan { legs, directions: directions.to_vec(), total_length: total, closed: graph.closed };
    validate_plan(&plan)?;
    Ok(plan)
}

/// Segment predictor used by the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentPredictor {
    /// Exhaustive sweep over the angle grid at every altitude.
    Sweep,
    /// A trained policy applied per altitude (argmax bin), with the
    /// lowest-altitude-best-reward rule on its proposals.
    Policy { model: crate::policy::PolicyModel, k_sectors: usize },
}

/// Everything the end-to-end pipeline needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub solver: SolverKind,
    pub seed: u64,
    pub segment: SegmentConfig,
    pub visibility: VisibilityParams,
    pub altitudes: AltitudeSet,
    pub limits: VehicleLimits,
    pub planner: PlannerOptions,
    /// Depot flight altitude above the depot's ground elevation.
    pub depot_altitude_agl: f64,
    pub predictor: SegmentPredictor,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::NearestInsertion,
            seed: 0,
            segment: SegmentConfig::default(),
            visibility: VisibilityParams::default(),
            altitudes: AltitudeSet::default(),
            limits: VehicleLimits::default(),
            planner: PlannerOptions::default(),
            depot_altitude_agl: 1_000.0,
            predictor: SegmentPredictor::Sweep,
        }
    }
}

/// Per-target outcome of the segment stage.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TargetReport {
    pub target_id: u32,
    pub alpha_rad: f64,
    pub altitude_agl: f64,
    pub reward: u32,
    pub accuracy: f64,
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct StageTimings {
    pub sequencing_s: f64,
    pub segments_s: f64,
    pub planning_s: f64,
}

/// Metrics emitted alongside a mission plan. Everything except `timings`
/// is a deterministic function of the inputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PipelineMetrics {
    pub total_length_m: f64,
    pub connector_length_m: f64,
    pub observation_length_m: f64,
    pub tour_length_m: f64,
    pub mean_accuracy: f64,
    pub targets: Vec<TargetReport>,
    pub search: SearchAudit,
    pub timings: StageTimings,
}

/// Full pipeline: sequencing, segment prediction, trajectory assembly.
pub fn plan_pipeline(
    grid: &TerrainGrid,
    targets: &TargetSet,
    config: &PipelineConfig,
) -> Result<(MissionPlan, PipelineMetrics)> {
    let t0 = Instant::now();
    let matrix = distance_matrix(targets);
    let tour = config.solver.solve(&matrix, config.seed)?;
    let sequencing_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut segments = BTreeMap::new();
    let mut reports = Vec::with_capacity(targets.len());
    for w in &targets.waypoints {
        let stack = visibility_stack(grid, w.x, w.y, w.id, &config.altitudes, &config.visibility)?;
        let seg = match &config.predictor {
            SegmentPredictor::Sweep => sweep_best_segment(&stack, &config.segment)?,
            SegmentPredictor::Policy { model, k_sectors } => {
                crate::policy::policy_best_segment(model, &stack, &config.segment, *k_sectors)?
            }
        };
        let map = stack
            .iter()
            .find(|m| m.altitude_agl == seg.altitude_agl)
            .ok_or_else(|| Error::Mismatch("chosen altitude missing from stack".into()))?;
        let reward = segment_reward(map, &seg)?;
        let accuracy = segment_accuracy(map, &seg)?;
        reports.push(TargetReport {
            target_id: w.id,
            alpha_rad: seg.angle_alpha,
            altitude_agl: seg.altitude_agl,
            reward,
            accuracy,
        });
        let ground = grid.elevation_at(w.x, w.y)?;
        segments.insert(w.id, PlannedSegment { segment: seg, ground_elevation: ground });
    }
    let segments_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let depot_ground = grid.elevation_at(targets.depot_x, targets.depot_y)?;
    let depot = Pose::new(targets.depot_x, targets.depot_y, depot_ground + config.depot_altitude_agl, 0.0);
    let graph = build_layer_graph(&tour, &segments, &depot, &config.limits, &config.planner)?;
    let toured_positions: Vec<(f64, f64)> = tour
        .order
        .iter()
        .map(|id| {
            targets
                .waypoints
                .iter()
                .find(|w| w.id == *id)
                .map(|w| (w.x, w.y))
                .ok_or_else(|| Error::InvalidArgument(format!("tour references unknown target {id}")))
        })
        .collect::<Result<_>>()?;
    let (plan, search) = astar_plan_with_audit(&graph, &toured_positions, &config.limits)?;
    let planning_s = t2.elapsed().as_secs_f64();

    let mean_accuracy = reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len() as f64;
    let metrics = PipelineMetrics {
        total_length_m: plan.total_length,
        connector_length_m: plan.connector_length(),
        observation_length_m: plan.observation_length(),
        tour_length_m: tour_length(&matrix, &tour)?,
        mean_accuracy,
        targets: reports,
        search,
        timings: StageTimings { sequencing_s, segments_s, planning_s },
    };
    Ok((plan, metrics))
}

// GeoJSON export: one LineString feature per leg, coordinates carry
// altitude as the third component.

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanGeometry {
    #[serde(rename = "type")]
    pub kind: String,
    pub coordinates: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanProperties {
    pub kind: String,
    pub target_id: Option<u32>,
    pub altitude: f64,
    pub length_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanFeature {
    #[serde(rename = "type")]
    pub kind: String,
    pub geometry: PlanGeometry,
    pub properties: PlanProperties,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanDocument {
    #[serde(rename = "type")]
    pub kind: String,
    pub features: Vec<PlanFeature>,
}

/// Renders a plan as a GeoJSON FeatureCollection in planar local
/// coordinates. Connectors are sampled at `spacing` meters.
pub fn plan_to_geojson(plan: &MissionPlan, spacing: f64) -> Result<PlanDocument> {
    let mut features = Vec::with_capacity(plan.legs.len());
    for leg in &plan.legs {
        let (coords, kind, target_id, altitude) = match leg {
            Leg::Connector { path, start, .. } => {
                let coords = sample_path(path, start, spacing)?
                    .iter()
                    .map(|p| [p.x, p.y, p.alt])
                    .collect();
                (coords, "connector".to_string(), None, path.alt_end)
            }
            Leg::Observation { traversal } => (
                vec![
                    [traversal.entry.x, traversal.entry.y, traversal.entry.alt],
                    [traversal.exit.x, traversal.exit.y, traversal.exit.alt],
                ],
                "segment".to_string(),
                Some(traversal.target_id),
                traversal.entry.alt,
            ),
        };
        features.push(PlanFeature {
            kind: "Feature".to_string(),
            geometry: PlanGeometry { kind: "LineString".to_string(), coordinates: coords },
            properties: PlanProperties { kind, target_id, altitude, length_m: leg.length() },
        });
    }
    Ok(PlanDocument { kind: "FeatureCollection".to_string(), features })
}

pub fn write_plan_geojson(plan: &MissionPlan, spacing: f64) -> Result<String> {
    let doc = plan_to_geojson(plan, spacing)?;
    serde_json::to_string(&doc).map_err(|e| Error::InvalidArgument(format!("geojson encode: {e}")))
}

pub fn read_plan_geojson(text: &str) -> Result<PlanDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: 0, msg: format!("geojson decode: {e}") })
}

pub const POSES_CSV_HEADER: &str = "leg,kind,x,y,alt,heading";

/// Sampled-pose CSV across the whole plan.
pub fn write_plan_poses_csv(plan: &MissionPlan, spacing: f64) -> Result<String> {
    let mut out = String::from(POSES_CSV_HEADER);
    out.push('\n');
    for (i, leg) in plan.legs.iter().enumerate() {
        let (kind, poses) = match leg {
            Leg::Connector { path, start, .. } => ("connector", sample_path(path, start, spacing)?),
            Leg::Observation { traversal } => ("segment", vec![traversal.entry, traversal.exit]),
        };
        for p in poses {
            out.push_str(&format!("{i},{kind},{},{},{},{}\n", p.x, p.y, p.alt, p.heading));
        }
    }
    Ok(out)
}
