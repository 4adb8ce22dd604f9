//! Fixtures and brute-force oracles shared by the integration tests. The
//! oracles here deliberately avoid the library's search code: they enumerate.

#![allow(dead_code)]

pub mod derived;

use uav_qoe::channel::ChannelParams;
use uav_qoe::clustering::Point2;
use uav_qoe::qoe::MosProfile;
use uav_qoe::world::{Action, Arena, GridPos, RadioConfig, UserState, World};

pub fn users_from(points: &[(f64, f64, usize)]) -> Vec<UserState> {
    points
        .iter()
        .enumerate()
        .map(|(id, &(x, y, cluster))| UserState {
            id,
            position: Point2::new(x, y),
            snr_target: 1.0,
            profile: MosProfile::default(),
            cluster,
        })
        .collect()
}

pub const FIX10: [(f64, f64, usize); 10] = [
    (170.0, 280.0, 0),
    (230.0, 310.0, 0),
    (190.0, 350.0, 0),
    (260.0, 260.0, 0),
    (205.0, 295.0, 0),
    (650.0, 600.0, 1),
    (720.0, 690.0, 1),
    (760.0, 640.0, 1),
    (690.0, 710.0, 1),
    (705.0, 655.0, 1),
];

/// 10 users, 2 UAVs at (200, 300, 120) and (700, 650, 200), 0.05 mW each.
pub fn fix10() -> World {
    World::new(
        Arena::default(),
        ChannelParams::default(),
        RadioConfig { bandwidth: 1e6, p_max: 5e-5 },
        users_from(&FIX10),
        vec![GridPos::new(20, 30, 7), GridPos::new(70, 65, 15)],
    )
    .unwrap()
}

pub fn fix20_points() -> Vec<(f64, f64, usize)> {
    (0..20)
        .map(|i| {
            let (c, m) = (i / 5, (i % 5) as f64);
            (80.0 + 230.0 * c as f64 + 41.0 * m, 120.0 + 170.0 * c as f64 + 23.0 * m * m, c)
        })
        .collect()
}

/// 20 users in 4 clusters of 5, UAV `c` at (150 + 230c, 200 + 170c, 60 + 40c), 10 dBm.
pub fn fix20() -> World {
    let uavs = (0..4).map(|c| GridPos::new(15 + 23 * c, 20 + 17 * c, 1 + 4 * c)).collect();
    World::new(
        Arena::default(),
        ChannelParams::default(),
        RadioConfig { bandwidth: 1e6, p_max: 0.01 },
        users_from(&fix20_points()),
        uavs,
    )
    .unwrap()
}

/// Random users over an arena, all in cluster 0.
pub fn random_users(rng: &mut impl rand::Rng, n: usize, x_max: f64, y_max: f64) -> Vec<UserState> {
    let pts: Vec<_> = (0..n)
        .map(|_| (rng.gen_range(0.0..=x_max), rng.gen_range(0.0..=y_max), 0))
        .collect();
    users_from(&pts)
}

/// Best cell of cluster `n` by plain enumeration, ties to the lowest index.
pub fn grid_optimum(world: &World, n: usize) -> (GridPos, f64) {
    let mut best = (GridPos::new(0, 0, 0), f64::NEG_INFINITY);
    for i in 0..world.arena.nx() {
        for j in 0..world.arena.ny() {
            for k in 0..world.arena.nh() {
                let g = GridPos::new(i, j, k);
                let v = world.cluster_mos(n, g);
                if v > best.1 {
                    best = (g, v);
                }
            }
        }
    }
    best
}

/// Exact minimum SSE over every assignment of `points` to `n` non-empty
/// clusters.
pub fn optimal_sse(points: &[Point2], n: usize) -> f64 {
    fn rec(points: &[Point2], n: usize, idx: usize, used: usize, assign: &mut Vec<usize>, best: &mut f64) {
        if idx == points.len() {
            if used < n {
                return;
            }
            let mut sse = 0.0;
            for c in 0..n {
                let members: Vec<&Point2> = points.iter().zip(assign.iter()).filter(|(_, a)| **a == c).map(|(p, _)| p).collect();
                let k = members.len() as f64;
                let mx = members.iter().map(|p| p.x).sum::<f64>() / k;
                let my = members.iter().map(|p| p.y).sum::<f64>() / k;
                sse += members.iter().map(|p| (p.x - mx).powi(2) + (p.y - my).powi(2)).sum::<f64>();
            }
            *best = best.min(sse);
            return;
        }
        if points.len() - idx < n - used {
            return;
        }
        // canonical labelling: a point may open at most one new cluster
        for c in 0..(used + 1).min(n) {
            assign.push(c);
            rec(points, n, idx + 1, used.max(c + 1), assign, best);
            assign.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(points, n, 0, 0, &mut Vec::with_capacity(points.len()), &mut best);
    best
}

/// Best horizon MOS over every action sequence, by depth-first enumeration
/// of all `7^S` sequences. Cluster MOS is tabulated per (slot, cell) first so
/// the enumeration itself is pure lookups.
pub fn best_sequence_dfs(world: &World, cluster: usize, start: GridPos, users: &[Vec<Point2>]) -> f64 {
    let arena = &world.arena;
    let slots = users.len() - 1;
    let cells = arena.cell_count();
    let table: Vec<Vec<f64>> = (0..=slots)
        .map(|t| (0..cells).map(|c| world.cluster_mos_at(cluster, arena.cell_at(c), &users[t])).collect())
        .collect();
    let moves: Vec<[usize; Action::COUNT]> = (0..cells)
        .map(|c| {
            let g = arena.cell_at(c);
            Action::ALL.map(|a| arena.cell_index(arena.step(g, a)))
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut stack = vec![(arena.cell_index(start), 0usize, 0.0f64)];
    while let Some((c, t, acc)) = stack.pop() {
        if t == slots {
            best = best.max(acc);
            continue;
        }
        for &next in &moves[c] {
            stack.push((next, t + 1, acc + table[t + 1][next]));
        }
    }
    best
}

/// Same optimum by dynamic programming over reachable cells.
pub fn best_sequence_dp(world: &World, cluster: usize, start: GridPos, users: &[Vec<Point2>]) -> f64 {
    let mut frontier = std::collections::BTreeMap::new();
    frontier.insert(start, 0.0f64);
    for t in 1..users.len() {
        let mut next_frontier = std::collections::BTreeMap::new();
        for (&g, &acc) in &frontier {
            for a in Action::ALL {
                let next = world.arena.step(g, a);
                let v = acc + world.cluster_mos_at(cluster, next, &users[t]);
                let e = next_frontier.entry(next).or_insert(f64::NEG_INFINITY);
                if v > *e {
                    *e = v;
                }
            }
        }
        frontier = next_frontier;
    }
    frontier.values().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Pearson statistic of `counts` against equal expected frequencies, and the
/// upper `alpha` critical value of the matching chi-square distribution.
pub fn chi_square_uniform(counts: &[u64], alpha: f64) -> (f64, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    (stat, dist.inverse_cdf(1.0 - alpha))
}

/// Kolmogorov-Smirnov distance between `samples` and the uniform
/// distribution on `[0, hi]`.
pub fn ks_uniform(samples: &mut [f64], hi: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (x / hi).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Cluster sum MOS recomputed link by link from the channel and QoE
/// formulas, bypassing the world's aggregation.
pub fn link_by_link_cluster_mos(world: &World, n: usize, at: GridPos, users: &[Point2]) -> f64 {
    use uav_qoe::channel::{self, Position3};
    let members: Vec<usize> = (0..world.users.len()).filter(|&u| world.users[u].cluster == n).collect();
    let k = members.len() as f64;
    let (bw, pw) = (world.radio.bandwidth / k, world.radio.p_max / k);
    let pos = world.arena.position(at);
    members
        .iter()
        .map(|&u| {
            let g = channel::link_geometry(pos, Position3::ground(users[u].x, users[u].y)).unwrap();
            let gain = channel::channel_gain(g, &world.channel);
            let r = channel::rate(pw, gain, bw, &world.channel);
            uav_qoe::qoe::mos(r, &world.users[u].profile).unwrap().value()
        })
        .sum()
}
