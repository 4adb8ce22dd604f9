//! Comparison placements: K-means, iterative GAK-means (IGK), exhaustive grid
//! search and random deployment, plus the two movement benchmarks (static
//! UAVs and per-slot IGK tracking).
//!
//! Every algorithm works on the world's fixed user partition and places UAVs
//! on grid cells, so results are directly comparable with Q-learning.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{self, ClusterError, GaConfig, Point2};
use crate::rl::MovementTrace;
use crate::world::{user_trajectory, Action, GridPos, MobilityConfig, World, WorldError};

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 100_000;
pub const IGK_MAX_ITERATIONS: usize = 50;
pub const IGK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("grid has {cells} cells, over the exhaustive cap of {cap}; raise the cap to at least {cells}")]
    CapExceeded { cells: usize, cap: usize },
    #[error("cluster {0} does not exist")]
    NoSuchCluster(usize),
    #[error("expected {expected} UAV positions, got {got}")]
    PositionCount { expected: usize, got: usize },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    QLearning,
    KMeans,
    Igk,
    Exhaustive,
    Random,
    Static,
}

impl Algorithm {
    pub const DEPLOYMENT: [Algorithm; 5] = [
        Algorithm::QLearning,
        Algorithm::KMeans,
        Algorithm::Igk,
        Algorithm::Exhaustive,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::QLearning => "q-learning",
            Algorithm::KMeans => "k-means",
            Algorithm::Igk => "igk",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Random => "random",
            Algorithm::Static => "static",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Algorithm::QLearning,
            Algorithm::KMeans,
            Algorithm::Igk,
            Algorithm::Exhaustive,
            Algorithm::Random,
            Algorithm::Static,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub algorithm: Algorithm,
    /// One cell per UAV, in cluster order.
    pub positions: Vec<GridPos>,
    pub cluster_mos: Vec<f64>,
    pub total_mos: f64,
    pub wall_clock: Duration,
    /// Cost counter: distance evaluations for clustering work plus
    /// per-user link evaluations for MOS work.
    pub evaluations: u64,
}

fn finish(
    world: &World,
    algorithm: Algorithm,
    positions: Vec<GridPos>,
    started: Instant,
    evaluations: u64,
) -> BaselineResult {
    let snap = world.snapshot_with(&positions, &world.user_positions());
    BaselineResult {
        algorithm,
        positions,
        cluster_mos: snap.cluster_mos,
        total_mos: snap.total_mos,
        wall_clock: started.elapsed(),
        evaluations,
    }
}

fn cluster_centroid(world: &World, n: usize, positions: &[Point2]) -> Point2 {
    let m = world.members(n);
    let (sx, sy) = m
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &u| (sx + positions[u].x, sy + positions[u].y));
    Point2::new(sx / m.len() as f64, sy / m.len() as f64)
}

fn centroids(world: &World, positions: &[Point2]) -> Vec<Point2> {
    (0..world.cluster_count())
        .map(|n| cluster_centroid(world, n, positions))
        .collect()
}

/// UAVs above the cluster centroids at the middle altitude level.
pub fn kmeans_deploy(world: &World) -> BaselineResult {
    let started = Instant::now();
    let arena = &world.arena;
    let level = arena.mid_level();
    let h = arena.position(GridPos::new(0, 0, level)).h;
    let positions = centroids(world, &world.user_positions())
        .into_iter()
        .map(|c| arena.snap(c.x, c.y, h))
        .collect();
    let evaluations = 2 * world.users.len() as u64;
    finish(world, Algorithm::KMeans, positions, started, evaluations)
}

/// Best altitude level above `(i, j)` for cluster `n`, ties to the lowest.
fn altitude_scan(world: &World, n: usize, i: u32, j: u32, users: &[Point2]) -> (GridPos, f64) {
    let mut best = (GridPos::new(i, j, 0), f64::NEG_INFINITY);
    for k in 0..world.arena.nh() {
        let g = GridPos::new(i, j, k);
        let v = world.cluster_mos_at(n, g, users);
        if v > best.1 {
            best = (g, v);
        }
    }
    best
}

/// Per-iteration totals of an IGK run.
#[derive(Debug, Clone, PartialEq)]
pub struct IgkTrace {
    pub result: BaselineResult,
    pub iteration_totals: Vec<f64>,
}

/// Iterative GAK-means: partition with GAK-means, then alternate a
/// horizontal step (UAV above its cluster centroid) with a per-cluster
/// altitude line search until the total improves by less than
/// `IGK_TOLERANCE` or `IGK_MAX_ITERATIONS` is reached.
///
/// The result is evaluated under the GAK-means partition, which is the
/// world's own partition when the world was clustered with the same config.
pub fn igk_deploy(world: &World, ga: &GaConfig) -> Result<IgkTrace, BaselineError> {
    let started = Instant::now();
    let users = world.user_positions();
    let clustered = clustering::gak_means(&users, world.cluster_count(), ga)?;
    let world = &world.with_partition(&clustered.partition, 0)?;
    let arena = &world.arena;
    let n = world.cluster_count();
    let mut evaluations = clustered.distance_evaluations;

    // start: centroids at the lowest level
    let mut positions = world.uav_positions();
    let mut totals: Vec<f64> = Vec::new();
    let mut best_total = world.snapshot_with(&positions, &users).total_mos;
    evaluations += users.len() as u64;

    for _ in 0..IGK_MAX_ITERATIONS {
        let horizontal = centroids(world, &users);
        evaluations += users.len() as u64;
        let mut candidate = positions.clone();
        for c in 0..n {
            let cell = arena.snap(horizontal[c].x, horizontal[c].y, arena.h_min);
            let (g, _) = altitude_scan(world, c, cell.i, cell.j, &users);
            evaluations += arena.nh() as u64 * world.members(c).len() as u64;
            candidate[c] = g;
        }
        let total = world.snapshot_with(&candidate, &users).total_mos;
        evaluations += users.len() as u64;
        let improved = total - best_total;
        if improved > 0.0 {
            positions = candidate;
            best_total = total;
        }
        totals.push(best_total);
        if improved < IGK_TOLERANCE {
            break;
        }
    }

    Ok(IgkTrace {
        result: finish(world, Algorithm::Igk, positions, started, evaluations),
        iteration_totals: totals,
    })
}

/// Optimum of cluster `n` over every grid cell; ties to the lexicographically
/// smallest cell.
pub fn exhaustive_cluster(world: &World, n: usize, cap: usize) -> Result<(GridPos, f64, u64), BaselineError> {
    if n >= world.cluster_count() {
        return Err(BaselineError::NoSuchCluster(n));
    }
    let arena = &world.arena;
    let cells = arena.cell_count();
    if cells > cap {
        return Err(BaselineError::CapExceeded { cells, cap });
    }
    let (idx, value) = (0..cells)
        .into_par_iter()
        .map(|idx| (idx, world.cluster_mos(n, arena.cell_at(idx))))
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    Ok((arena.cell_at(idx), value, cells as u64))
}

/// Exhaustive per-cluster search; `evaluations` counts grid cells visited.
pub fn exhaustive_deploy(world: &World, cap: usize) -> Result<BaselineResult, BaselineError> {
    let started = Instant::now();
    let mut positions = Vec::with_capacity(world.cluster_count());
    let mut evaluations = 0;
    for n in 0..world.cluster_count() {
        let (g, _, e) = exhaustive_cluster(world, n, cap)?;
        positions.push(g);
        evaluations += e;
    }
    Ok(finish(world, Algorithm::Exhaustive, positions, started, evaluations))
}

/// One uniformly random cell per UAV.
pub fn random_deploy(world: &World, seed: u64) -> BaselineResult {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = world.arena.cell_count();
    let positions = (0..world.cluster_count())
        .map(|_| world.arena.cell_at(rng.gen_range(0..cells)))
        .collect();
    finish(world, Algorithm::Random, positions, started, 0)
}

fn check_positions(world: &World, positions: &[GridPos]) -> Result<(), BaselineError> {
    if positions.len() != world.cluster_count() {
        return Err(BaselineError::PositionCount {
            expected: world.cluster_count(),
            got: positions.len(),
        });
    }
    if let Some(bad) = positions.iter().position(|g| !world.arena.contains(*g)) {
        return Err(WorldError::UavOutside(bad).into());
    }
    Ok(())
}

fn trace_from_paths(world: &World, paths: Vec<Vec<GridPos>>, users: Vec<Vec<Point2>>) -> MovementTrace {
    let mut total_mos = Vec::with_capacity(paths.len() - 1);
    let mut cluster_mos = Vec::with_capacity(paths.len() - 1);
    for t in 1..paths.len() {
        let per: Vec<f64> = paths[t]
            .iter()
            .enumerate()
            .map(|(n, &g)| world.cluster_mos_at(n, g, &users[t]))
            .collect();
        total_mos.push(per.iter().sum());
        cluster_mos.push(per);
    }
    MovementTrace {
        positions: paths,
        total_mos,
        cluster_mos,
        user_positions: users,
    }
}

/// UAVs frozen at `positions` while users roam.
pub fn static_movement_baseline(
    world: &World,
    positions: &[GridPos],
    mobility: &MobilityConfig,
    trajectory_seed: u64,
) -> Result<MovementTrace, BaselineError> {
    check_positions(world, positions)?;
    let slots = world.arena.slots();
    let users = user_trajectory(&world.users, mobility, &world.arena, trajectory_seed, slots);
    Ok(trace_from_paths(world, vec![positions.to_vec(); slots + 1], users))
}

/// Single grid move that closes the largest axis gap to `target`, ties to
/// the first axis.
fn step_toward(from: GridPos, target: GridPos) -> Action {
    let gaps = [
        (target.i as i64 - from.i as i64, Action::Right, Action::Left),
        (target.j as i64 - from.j as i64, Action::Forward, Action::Backward),
        (target.k as i64 - from.k as i64, Action::Ascend, Action::Descend),
    ];
    let mut best = gaps[0];
    for g in &gaps[1..] {
        if g.0.abs() > best.0.abs() {
            best = *g;
        }
    }
    match best.0.signum() {
        1 => best.1,
        -1 => best.2,
        _ => Action::Stay,
    }
}

/// Per-slot IGK tracking: at each slot every UAV re-solves its IGK target for
/// the next user positions and moves one grid step toward it.
pub fn igk_movement_baseline(
    world: &World,
    positions: &[GridPos],
    mobility: &MobilityConfig,
    trajectory_seed: u64,
    cap: usize,
) -> Result<MovementTrace, BaselineError> {
    check_positions(world, positions)?;
    let arena = &world.arena;
    let slots = arena.slots();
    let per_slot = world.cluster_count() * arena.nh() as usize;
    if per_slot.saturating_mul(slots) > cap {
        return Err(BaselineError::CapExceeded {
            cells: per_slot * slots,
            cap,
        });
    }
    let users = user_trajectory(&world.users, mobility, arena, trajectory_seed, slots);
    let mut current = positions.to_vec();
    let mut paths = vec![current.clone()];
    for next_users in users.iter().skip(1) {
        for (n, g) in current.iter_mut().enumerate() {
            let c = cluster_centroid(world, n, next_users);
            let cell = arena.snap(c.x, c.y, arena.h_min);
            let (target, _) = altitude_scan(world, n, cell.i, cell.j, next_users);
            *g = arena.step(*g, step_toward(*g, target));
        }
        paths.push(current.clone());
    }
    Ok(trace_from_paths(world, paths, users))
}
