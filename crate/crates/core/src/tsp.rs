//! Waypoint sequencing: exact and heuristic tour solvers over a depot-rooted
//! target set.
//!
//! All solvers work on a symmetric Euclidean [`DistanceMatrix`] with the
//! depot at index 0 and return a [`Tour`] visiting every waypoint exactly
//! once. `solve_exact` is a Held-Karp dynamic program (the correctness
//! reference for small instances); the insertion family and Christofides
//! are the classical constructions; `improve_2opt` polishes any tour with
//! 2-edge exchanges.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest waypoint count accepted by [`solve_exact`].
pub const EXACT_SOLVER_MAX: usize = 18;

/// Largest odd-vertex count for which Christofides uses the exact
/// subset-DP matching; beyond it a greedy matching is used instead.
pub const EXACT_MATCHING_MAX: usize = 20;

/// One target with a stable identifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

/// A depot plus the waypoints to visit.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub depot_x: f64,
    pub depot_y: f64,
    pub waypoints: Vec<Waypoint>,
}

impl TargetSet {
    pub fn new(depot_x: f64, depot_y: f64, waypoints: Vec<Waypoint>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidArgument("target set needs at least one waypoint".into()));
        }
        if !depot_x.is_finite()
            || !depot_y.is_finite()
            || waypoints.iter().any(|w| !w.x.is_finite() || !w.y.is_finite())
        {
            return Err(Error::InvalidArgument("coordinates must be finite".into()));
        }
        let mut ids: Vec<u32> = waypoints.iter().map(|w| w.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) || ids.contains(&0) {
            return Err(Error::InvalidArgument("waypoint ids must be unique and nonzero".into()));
        }
        Ok(Self { depot_x, depot_y, waypoints })
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }
}

/// Visit order over waypoint ids. A closed tour additionally runs
/// depot -> first and last -> depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<u32>,
    pub closed: bool,
}

/// Symmetric travel costs; index 0 is the depot, index i >= 1 is
/// `ids[i - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<u32>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Number of waypoints (excluding the depot).
    pub fn waypoints(&self) -> usize {
        self.ids.len()
    }

    fn nodes(&self) -> usize {
        self.ids.len() + 1
    }

    /// Distance between matrix indices (0 = depot).
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.nodes() + j]
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn id_of(&self, index: usize) -> u32 {
        self.ids[index - 1]
    }

    pub fn index_of(&self, id: u32) -> Result<usize> {
        self.ids
            .iter()
            .position(|&w| w == id)
            .map(|p| p + 1)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown waypoint id {id}")))
    }
}

/// Euclidean distance matrix for a target set.
pub fn distance_matrix(ts: &TargetSet) -> DistanceMatrix {
    let mut points = vec![(ts.depot_x, ts.depot_y)];
    points.extend(ts.waypoints.iter().map(|w| (w.x, w.y)));
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1);
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    }
    DistanceMatrix { ids: ts.waypoints.iter().map(|w| w.id).collect(), d }
}

fn tour_indices(m: &DistanceMatrix, t: &Tour) -> Result<Vec<usize>> {
    if t.order.len() != m.waypoints() {
        return Err(Error::InvalidArgument(format!(
            "tour visits {} waypoints, matrix has {}",
            t.order.len(),
            m.waypoints()
        )));
    }
    let mut seen = vec![false; m.nodes()];
    let mut indices = Vec::with_capacity(t.order.len());
    for &id in &t.order {
        let idx = m.index_of(id)?;
        if seen[idx] {
            return Err(Error::InvalidArgument(format!("waypoint {id} visited twice")));
        }
        seen[idx] = true;
        indices.push(idx);
    }
    Ok(indices)
}

/// Total tour length. Closed tours include the depot legs; open tours sum
/// only the consecutive waypoint legs.
pub fn tour_length(m: &DistanceMatrix, t: &Tour) -> Result<f64> {
    let idx = tour_indices(m, t)?;
    let mut len: f64 = idx.windows(2).map(|w| m.dist(w[0], w[1])).sum();
    if t.closed {
        len += m.dist(0, idx[0]) + m.dist(*idx.last().expect("nonempty tour"), 0);
    }
    Ok(len)
}

/// Held-Karp dynamic program: provably minimum closed tour through the
/// depot. Limited to [`EXACT_SOLVER_MAX`] waypoints by memory.
pub fn solve_exact(m: &DistanceMatrix) -> Result<Tour> {
    let n = m.waypoints();
    if n > EXACT_SOLVER_MAX {
        return Err(Error::ExactSolverLimit { n, max: EXACT_SOLVER_MAX });
    }
    if n == 1 {
        return Ok(Tour { order: vec![m.id_of(1)], closed: true });
    }
    let full = 1usize << n;
    let mut cost = vec![f64::INFINITY; full * n];
    let mut parent = vec![u8::MAX; full * n];
    for j in 0..n {
        cost[(1 << j) * n + j] = m.dist(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let c = cost[mask * n + j];
            if !c.is_finite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next_mask = mask | (1 << k);
                let cand = c + m.dist(j + 1, k + 1);
                if cand < cost[next_mask * n + k] {
                    cost[next_mask * n + k] = cand;
                    parent[next_mask * n + k] = j as u8;
                }
            }
        }
    }
    let mut best_j = 0;
    let mut best = f64::INFINITY;
    for j in 0..n {
        let total = cost[(full - 1) * n + j] + m.dist(j + 1, 0);
        if total < best {
            best = total;
            best_j = j;
        }
    }
    let mut order_rev = Vec::with_capacity(n);
    let mut mask = full - 1;
    let mut j = best_j;
    loop {
        order_rev.push(m.id_of(j + 1));
        let p = parent[mask * n + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order_rev.reverse();
    Ok(Tour { order: order_rev, closed: true })
}

/// City-selection rule for [`solve_insertion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionVariant {
    Nearest,
    Farthest,
    Random,
}

/// Insertion construction from the depot: repeatedly pick the next city by
/// the variant rule and insert it where the length increase is smallest.
pub fn solve_insertion(m: &DistanceMatrix, variant: InsertionVariant, seed: u64) -> Tour {
    let n = m.waypoints();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Cycle over matrix indices, depot fixed at the front.
    let mut cycle: Vec<usize> = vec![0];
    let mut remaining: Vec<usize> = (1..=n).collect();
    // Distance from each unvisited city to the growing tour.
    let mut to_tour: Vec<f64> = (0..=n).map(|i| m.dist(i, 0)).collect();

    while !remaining.is_empty() {
        let pick = match variant {
            InsertionVariant::Random => rng.gen_range(0..remaining.len()),
            InsertionVariant::Nearest => {
                let mut best = 0;
                for (i, &c) in remaining.iter().enumerate() {
                    if to_tour[c] < to_tour[remaining[best]] {
                        best = i;
                    }
                }
                best
            }
            InsertionVariant::Farthest => {
                let mut best = 0;
                for (i, &c) in remaining.iter().enumerate() {
                    if to_tour[c] > to_tour[remaining[best]] {
                        best = i;
                    }
                }
                best
            }
        };
        let city = remaining.swap_remove(pick);
        // Cheapest insertion edge in the cycle.
        let mut best_pos = 0;
        let mut best_delta = f64::INFINITY;
        for pos in 0..cycle.len() {
            let a = cycle[pos];
            let b = cycle[(pos + 1) % cycle.len()];
            let delta = m.dist(a, city) + m.dist(city, b) - m.dist(a, b);
            if delta < best_delta {
                best_delta = delta;
                best_pos = pos;
            }
        }
        cycle.insert(best_pos + 1, city);
        for (i, nearest) in to_tour.iter_mut().enumerate() {
            let d = m.dist(i, city);
            if d < *nearest {
                *nearest = d;
            }
        }
    }
    let order = cycle[1..].iter().map(|&i| m.id_of(i)).collect();
    Tour { order, closed: true }
}

/// Minimum spanning tree over all nodes (Prim), as an adjacency list.
fn minimum_spanning_tree(m: &DistanceMatrix) -> Vec<Vec<usize>> {
    let nodes = m.waypoints() + 1;
    let mut in_tree = vec![false; nodes];
    let mut best_cost = vec![f64::INFINITY; nodes];
    let mut best_edge = vec![0usize; nodes];
    let mut adj = vec![Vec::new(); nodes];
    in_tree[0] = true;
    for (v, cost) in best_cost.iter_mut().enumerate().skip(1) {
        *cost = m.dist(0, v);
    }
    for _ in 1..nodes {
        let mut pick = usize::MAX;
        for v in 0..nodes {
            if !in_tree[v] && (pick == usize::MAX || best_cost[v] < best_cost[pick]) {
                pick = v;
            }
        }
        in_tree[pick] = true;
        adj[pick].push(best_edge[pick]);
        adj[best_edge[pick]].push(pick);
        for v in 0..nodes {
            if !in_tree[v] && m.dist(pick, v) < best_cost[v] {
                best_cost[v] = m.dist(pick, v);
                best_edge[v] = pick;
            }
        }
    }
    adj
}

/// Minimum-weight perfect matching on an even vertex set by subset DP.
fn exact_matching(m: &DistanceMatrix, odd: &[usize]) -> Vec<(usize, usize)> {
    let k = odd.len();
    let full = 1usize << k;
    let mut cost = vec![f64::INFINITY; full];
    let mut choice = vec![(0u8, 0u8); full];
    cost[0] = 0.0;
    for mask in 1..full {
        let first = mask.trailing_zeros() as usize;
        if mask & (1 << first) == 0 {
            continue;
        }
        for second in (first + 1)..k {
            if mask & (1 << second) == 0 {
                continue;
            }
            let rest = mask & !(1 << first) & !(1 << second);
            let cand = cost[rest] + m.dist(odd[first], odd[second]);
            if cand < cost[mask] {
                cost[mask] = cand;
                choice[mask] = (first as u8, second as u8);
            }
        }
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut mask = full - 1;
    while mask != 0 {
        let (a, b) = choice[mask];
        pairs.push((odd[a as usize], odd[b as usize]));
        mask &= !(1 << a) & !(1 << b);
    }
    pairs
}

/// Greedy fallback matching: repeatedly pair the closest unmatched vertices.
fn greedy_matching(m: &DistanceMatrix, odd: &[usize]) -> Vec<(usize, usize)> {
    let mut unmatched: Vec<usize> = odd.to_vec();
    let mut pairs = Vec::with_capacity(odd.len() / 2);
    while !unmatched.is_empty() {
        let mut best = (0usize, 1usize);
        let mut best_d = f64::INFINITY;
        for i in 0..unmatched.len() {
            for j in (i + 1)..unmatched.len() {
                let d = m.dist(unmatched[i], unmatched[j]);
                if d < best_d {
                    best_d = d;
                    best = (i, j);
                }
            }
        }
        let (i, j) = best;
        pairs.push((unmatched[i], unmatched[j]));
        unmatched.remove(j);
        unmatched.remove(i);
    }
    pairs
}

/// Christofides construction: MST, perfect matching on the odd-degree
/// vertices, Eulerian circuit, shortcutting.
///
/// The matching is exact (subset DP) for up to [`EXACT_MATCHING_MAX`] odd
/// vertices, where the 1.5-approximation bound applies; larger instances
/// fall back to a greedy matching.
pub fn solve_christofides(m: &DistanceMatrix) -> Tour {
    let nodes = m.waypoints() + 1;
    if m.waypoints() == 1 {
        return Tour { order: vec![m.id_of(1)], closed: true };
    }
    let mst = minimum_spanning_tree(m);
    let odd: Vec<usize> = (0..nodes).filter(|&v| mst[v].len() % 2 == 1).collect();
    let pairs = if odd.len() <= EXACT_MATCHING_MAX { exact_matching(m, &odd) } else { greedy_matching(m, &odd) };

    // Multigraph = MST + matching edges; every degree is even.
    let mut multi: Vec<Vec<usize>> = mst;
    for &(a, b) in &pairs {
        multi[a].push(b);
        multi[b].push(a);
    }
    for adj in multi.iter_mut() {
        adj.sort_unstable();
    }

    // Hierholzer Eulerian circuit from the depot.
    let mut stack = vec![0usize];
    let mut circuit = Vec::new();
    let mut multi: Vec<Vec<usize>> = multi;
    while let Some(&v) = stack.last() {
        if let Some(next) = multi[v].pop() {
            let back = multi[next].iter().rposition(|&u| u == v).expect("undirected edge");
            multi[next].remove(back);
            stack.push(next);
        } else {
            circuit.push(v);
            stack.pop();
        }
    }

    // Shortcut repeated vertices.
    let mut seen = vec![false; nodes];
    let mut order = Vec::with_capacity(m.waypoints());
    for &v in circuit.iter().rev() {
        if v != 0 && !seen[v] {
            seen[v] = true;
            order.push(m.id_of(v));
        }
    }
    Tour { order, closed: true }
}

/// Repeated improving 2-edge exchanges until none remains. Never increases
/// the tour length.
pub fn improve_2opt(m: &DistanceMatrix, t: &Tour) -> Result<Tour> {
    let mut idx = tour_indices(m, t)?;
    let n = idx.len();
    if n >= 2 {
        loop {
            let mut best_delta = -1e-9;
            let mut best_move: Option<(usize, usize)> = None;
            for i in 0..n {
                let prev = if i == 0 {
                    if t.closed {
                        0
                    } else {
                        usize::MAX
                    }
                } else {
                    idx[i - 1]
                };
                for j in i + 1..n {
                    let next = if j == n - 1 {
                        if t.closed {
                            0
                        } else {
                            usize::MAX
                        }
                    } else {
                        idx[j + 1]
                    };
                    // Reversing idx[i..=j] replaces edges (prev, i) and
                    // (j, next) with (prev, j) and (i, next).
                    let mut delta = 0.0;
                    if prev != usize::MAX {
                        delta += m.dist(prev, idx[j]) - m.dist(prev, idx[i]);
                    }
                    if next != usize::MAX {
                        delta += m.dist(idx[i], next) - m.dist(idx[j], next);
                    }
                    if delta < best_delta {
                        best_delta = delta;
                        best_move = Some((i, j));
                    }
                }
            }
            match best_move {
                Some((i, j)) => idx[i..=j].reverse(),
                None => break,
            }
        }
    }
    Ok(Tour { order: idx.into_iter().map(|i| m.id_of(i)).collect(), closed: t.closed })
}

/// Named solver selection for command lines and benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    NearestInsertion,
    FarthestInsertion,
    RandomInsertion,
    Christofides,
    /// Nearest insertion polished by 2-opt.
    TwoOpt,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Exact,
        SolverKind::NearestInsertion,
        SolverKind::FarthestInsertion,
        SolverKind::RandomInsertion,
        SolverKind::Christofides,
        SolverKind::TwoOpt,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exact" => Ok(SolverKind::Exact),
            "nearest" => Ok(SolverKind::NearestInsertion),
            "farthest" => Ok(SolverKind::FarthestInsertion),
            "random" => Ok(SolverKind::RandomInsertion),
            "christofides" => Ok(SolverKind::Christofides),
            "2opt" => Ok(SolverKind::TwoOpt),
            other => Err(Error::InvalidArgument(format!(
                "unknown solver '{other}' (expected exact|nearest|farthest|random|christofides|2opt)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::NearestInsertion => "nearest",
            SolverKind::FarthestInsertion => "farthest",
            SolverKind::RandomInsertion => "random",
            SolverKind::Christofides => "christofides",
            SolverKind::TwoOpt => "2opt",
        }
    }

    pub fn solve(&self, m: &DistanceMatrix, seed: u64) -> Result<Tour> {
        match self {
            SolverKind::Exact => solve_exact(m),
            SolverKind::NearestInsertion => Ok(solve_insertion(m, InsertionVariant::Nearest, seed)),
            SolverKind::FarthestInsertion => Ok(solve_insertion(m, InsertionVariant::Farthest, seed)),
            SolverKind::RandomInsertion => Ok(solve_insertion(m, InsertionVariant::Random, seed)),
            SolverKind::Christofides => Ok(solve_christofides(m)),
            SolverKind::TwoOpt => improve_2opt(m, &solve_insertion(m, InsertionVariant::Nearest, seed)),
        }
    }
}

pub const TARGETS_CSV_HEADER: &str = "id,x,y";

/// Targets CSV with the depot as id 0.
pub fn write_targets_csv(ts: &TargetSet) -> String {
    let mut out = String::from(TARGETS_CSV_HEADER);
    out.push('\n');
    out.push_str(&format!("0,{},{}\n", ts.depot_x, ts.depot_y));
    for w in &ts.waypoints {
        out.push_str(&format!("{},{},{}\n", w.id, w.x, w.y));
    }
    out
}

pub fn read_targets_csv(text: &str) -> Result<TargetSet> {
    let mut depot: Option<(f64, f64)> = None;
    let mut waypoints = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim() != TARGETS_CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("unexpected header '{line}'") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line: line_no, msg: format!("expected 3 fields, got {}", fields.len()) });
        }
        let id: u32 = fields[0]
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("'{}' is not an id", fields[0]) })?;
        let x: f64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("'{}' is not a number", fields[1]) })?;
        let y: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("'{}' is not a number", fields[2]) })?;
        if id == 0 {
            depot = Some((x, y));
        } else {
            waypoints.push(Waypoint { id, x, y });
        }
    }
    let (dx, dy) = depot.ok_or_else(|| Error::Parse { line: 0, msg: "missing depot row (id 0)".into() })?;
    TargetSet::new(dx, dy, waypoints)
}

pub const TOUR_CSV_HEADER: &str = "position,id";

pub fn write_tour_csv(t: &Tour) -> String {
    let mut out = String::from(TOUR_CSV_HEADER);
    out.push('\n');
    for (pos, id) in t.order.iter().enumerate() {
        out.push_str(&format!("{pos},{id}\n"));
    }
    out
}

/// Reads back a tour order written by [`write_tour_csv`].
pub fn read_tour_csv(text: &str, closed: bool) -> Result<Tour> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim() != TOUR_CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("unexpected header '{line}'") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (pos, id) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse { line: line_no, msg: "expected position,id".into() })?;
        let pos: usize = pos
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("'{pos}' is not a position") })?;
        let id: u32 = id
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("'{id}' is not an id") })?;
        rows.push((pos, id));
    }
    for (expect, &(pos, _)) in rows.iter().enumerate() {
        if pos != expect {
            return Err(Error::Parse { line: pos + 2, msg: format!("positions out of order at {pos}") });
        }
    }
    Ok(Tour { order: rows.into_iter().map(|(_, id)| id).collect(), closed })
}
