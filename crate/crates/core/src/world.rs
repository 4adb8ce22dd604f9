//! The simulation arena.
//!
//! Users live on the continuous ground plane and follow a four-direction
//! random walk. UAVs live on a discrete 3D grid and move one grid step per
//! timeslot in one of seven directions. Each cluster owns its own spectrum,
//! so a cluster's MOS depends only on its own UAV and members.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{self, ChannelError, ChannelParams, Position3};
use crate::clustering::{Partition, Point2};
use crate::qoe::{self, MosProfile, QoeError, MOS_MIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("invalid arena: {0}")]
    InvalidArena(&'static str),
    #[error("cluster {0} has no users")]
    EmptyCluster(usize),
    #[error("user {user} assigned to cluster {cluster}, but only {clusters} clusters exist")]
    BadAssignment { user: usize, cluster: usize, clusters: usize },
    #[error("user {0} lies outside the arena")]
    UserOutside(usize),
    #[error("UAV {0} lies outside the grid")]
    UavOutside(usize),
    #[error("user {0} needs a positive SNR target")]
    BadSnrTarget(usize),
    #[error("invalid radio config: {0}")]
    InvalidRadio(&'static str),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Qoe(#[from] QoeError),
}

/// Bounded, discretized deployment area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Arena {
    pub x_max: f64,
    pub y_max: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub grid_step_horizontal: f64,
    pub grid_step_vertical: f64,
    /// Timeslot length in s.
    pub timeslot: f64,
    /// Movement horizon in s.
    pub horizon: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            x_max: 1000.0,
            y_max: 1000.0,
            h_min: 50.0,
            h_max: 300.0,
            grid_step_horizontal: 10.0,
            grid_step_vertical: 10.0,
            timeslot: 1.0,
            horizon: 100.0,
        }
    }
}

/// Integer grid coordinates of a UAV. Ordering is lexicographic `(i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl GridPos {
    pub const fn new(i: u32, j: u32, k: u32) -> Self {
        Self { i, j, k }
    }
}

fn levels(span: f64, step: f64) -> u32 {
    (span / step + 1e-9).floor() as u32 + 1
}

impl Arena {
    pub fn validate(&self) -> Result<(), WorldError> {
        let vals = [
            self.x_max,
            self.y_max,
            self.h_min,
            self.h_max,
            self.grid_step_horizontal,
            self.grid_step_vertical,
            self.timeslot,
            self.horizon,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(WorldError::InvalidArena("non-finite field"));
        }
        if self.x_max < 0.0 || self.y_max < 0.0 {
            return Err(WorldError::InvalidArena("x_max and y_max must be >= 0"));
        }
        if !(0.0 < self.h_min && self.h_min <= self.h_max) {
            return Err(WorldError::InvalidArena("need 0 < h_min <= h_max"));
        }
        if self.grid_step_horizontal <= 0.0 || self.grid_step_vertical <= 0.0 {
            return Err(WorldError::InvalidArena("grid steps must be positive"));
        }
        if self.timeslot <= 0.0 || self.horizon <= 0.0 {
            return Err(WorldError::InvalidArena("timeslot and horizon must be positive"));
        }
        let ratio = self.horizon / self.timeslot;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(WorldError::InvalidArena("horizon must be a multiple of the timeslot"));
        }
        Ok(())
    }

    pub fn nx(&self) -> u32 {
        levels(self.x_max, self.grid_step_horizontal)
    }

    pub fn ny(&self) -> u32 {
        levels(self.y_max, self.grid_step_horizontal)
    }

    pub fn nh(&self) -> u32 {
        levels(self.h_max - self.h_min, self.grid_step_vertical)
    }

    pub fn cell_count(&self) -> usize {
        self.nx() as usize * self.ny() as usize * self.nh() as usize
    }

    /// Number of timeslots in the movement horizon.
    pub fn slots(&self) -> usize {
        (self.horizon / self.timeslot).round() as usize
    }

    pub fn contains(&self, g: GridPos) -> bool {
        g.i < self.nx() && g.j < self.ny() && g.k < self.nh()
    }

    pub fn position(&self, g: GridPos) -> Position3 {
        Position3::new(
            g.i as f64 * self.grid_step_horizontal,
            g.j as f64 * self.grid_step_horizontal,
            self.h_min + g.k as f64 * self.grid_step_vertical,
        )
    }

    /// Dense index, `k` fastest.
    pub fn cell_index(&self, g: GridPos) -> usize {
        let (ny, nh) = (self.ny() as usize, self.nh() as usize);
        (g.i as usize * ny + g.j as usize) * nh + g.k as usize
    }

    pub fn cell_at(&self, index: usize) -> GridPos {
        let (ny, nh) = (self.ny() as usize, self.nh() as usize);
        GridPos::new((index / (ny * nh)) as u32, ((index / nh) % ny) as u32, (index % nh) as u32)
    }

    /// Nearest grid cell to a continuous position, clamped into the box.
    pub fn snap(&self, x: f64, y: f64, h: f64) -> GridPos {
        let snap_axis = |v: f64, step: f64, n: u32| -> u32 {
            let idx = (v / step).round();
            idx.clamp(0.0, (n - 1) as f64) as u32
        };
        GridPos::new(
            snap_axis(x, self.grid_step_horizontal, self.nx()),
            snap_axis(y, self.grid_step_horizontal, self.ny()),
            snap_axis(h - self.h_min, self.grid_step_vertical, self.nh()),
        )
    }

    /// Altitude level closest to the middle of `[h_min, h_max]`.
    pub fn mid_level(&self) -> u32 {
        self.snap(0.0, 0.0, 0.5 * (self.h_min + self.h_max)).k
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        (0.0..=self.x_max).contains(&p.x) && (0.0..=self.y_max).contains(&p.y)
    }

    pub fn clip_point(&self, p: Point2) -> Point2 {
        Point2::new(p.x.clamp(0.0, self.x_max), p.y.clamp(0.0, self.y_max))
    }

    /// Grid position after `action`; moves that leave the box are ignored.
    pub fn step(&self, g: GridPos, action: Action) -> GridPos {
        let (di, dj, dk) = action.delta();
        let shift = |v: u32, d: i32, n: u32| -> Option<u32> {
            let next = v as i64 + d as i64;
            (0..n as i64).contains(&next).then_some(next as u32)
        };
        match (shift(g.i, di, self.nx()), shift(g.j, dj, self.ny()), shift(g.k, dk, self.nh())) {
            (Some(i), Some(j), Some(k)) => GridPos::new(i, j, k),
            _ => g,
        }
    }
}

/// The seven UAV displacements. Declaration order is the action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Right,
    Left,
    Forward,
    Backward,
    Ascend,
    Descend,
    Stay,
}

impl Action {
    pub const ALL: [Action; 7] = [
        Action::Right,
        Action::Left,
        Action::Forward,
        Action::Backward,
        Action::Ascend,
        Action::Descend,
        Action::Stay,
    ];
    pub const COUNT: usize = 7;

    pub fn delta(self) -> (i32, i32, i32) {
        match self {
            Action::Right => (1, 0, 0),
            Action::Left => (-1, 0, 0),
            Action::Forward => (0, 1, 0),
            Action::Backward => (0, -1, 0),
            Action::Ascend => (0, 0, 1),
            Action::Descend => (0, 0, -1),
            Action::Stay => (0, 0, 0),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserState {
    pub id: usize,
    pub position: Point2,
    /// Linear SNR target.
    pub snr_target: f64,
    pub profile: MosProfile,
    pub cluster: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UavState {
    pub id: usize,
    pub grid: GridPos,
    pub cluster: usize,
}

pub fn step_uav(state: UavState, action: Action, arena: &Arena) -> UavState {
    UavState {
        grid: arena.step(state.grid, action),
        ..state
    }
}

/// Per-UAV spectrum and power budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Bandwidth of one UAV (cluster) in Hz.
    pub bandwidth: f64,
    /// Maximum transmit power of one UAV in W.
    pub p_max: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            bandwidth: 1.0e6,
            p_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    /// Maximum pedestrian speed in m/s.
    pub c_max: f64,
    pub rng_seed: u64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self { c_max: 2.0, rng_seed: 0 }
    }
}

/// One random-walk step for every user: direction uniform over the four
/// axes, speed uniform in `[0, c_max]`, clipped at the arena edge. Cluster
/// membership never changes.
pub fn step_users<R: Rng>(users: &mut [UserState], mobility: &MobilityConfig, arena: &Arena, rng: &mut R) {
    for u in users.iter_mut() {
        let dir = rng.gen_range(0..4u8);
        let dist = rng.gen::<f64>() * mobility.c_max * arena.timeslot;
        let (dx, dy) = match dir {
            0 => (-dist, 0.0),
            1 => (dist, 0.0),
            2 => (0.0, dist),
            _ => (0.0, -dist),
        };
        u.position = arena.clip_point(Point2::new(u.position.x + dx, u.position.y + dy));
    }
}

/// User positions at every slot `0..=slots` of a seeded random walk.
pub fn user_trajectory(
    users: &[UserState],
    mobility: &MobilityConfig,
    arena: &Arena,
    seed: u64,
    slots: usize,
) -> Vec<Vec<Point2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walkers = users.to_vec();
    let mut out = Vec::with_capacity(slots + 1);
    out.push(walkers.iter().map(|u| u.position).collect());
    for _ in 0..slots {
        step_users(&mut walkers, mobility, arena, &mut rng);
        out.push(walkers.iter().map(|u| u.position).collect());
    }
    out
}

/// Reward values for improve / equal / worse MOS transitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardScheme {
    pub improve: f64,
    pub equal: f64,
    pub worse: f64,
    /// Absolute tolerance for the equality branch.
    pub tolerance: f64,
}

impl Default for RewardScheme {
    fn default() -> Self {
        Self {
            improve: 1.0,
            equal: -0.1,
            worse: -1.0,
            tolerance: 1e-12,
        }
    }
}

impl RewardScheme {
    pub fn reward(&self, mos_new: f64, mos_old: f64) -> f64 {
        let diff = mos_new - mos_old;
        if diff.abs() <= self.tolerance {
            self.equal
        } else if diff > 0.0 {
            self.improve
        } else {
            self.worse
        }
    }
}

/// `+1` on improvement, `-0.1` on a tie, `-1` otherwise.
pub fn reward(mos_new: f64, mos_old: f64) -> f64 {
    RewardScheme::default().reward(mos_new, mos_old)
}

/// Link-level metrics for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    pub user: usize,
    pub cluster: usize,
    pub distance: f64,
    pub snr: f64,
    pub rate: f64,
    pub mos: f64,
    /// Whether the SNR target is met.
    pub snr_ok: bool,
    /// Transmit power the pure-NLoS bound asks for at this distance.
    pub required_power: f64,
    /// Power actually allocated to the user.
    pub allocated_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub users: Vec<UserLink>,
    pub cluster_mos: Vec<f64>,
    pub total_mos: f64,
    pub sum_rate: f64,
}

/// MOS for a rate, with a vanishing rate mapped to the bottom of the scale.
fn link_mos(rate: f64, profile: &MosProfile) -> f64 {
    if rate > 0.0 {
        qoe::mos(rate, profile).map(|m| m.value()).unwrap_or(MOS_MIN)
    } else {
        MOS_MIN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub arena: Arena,
    pub channel: ChannelParams,
    pub radio: RadioConfig,
    pub users: Vec<UserState>,
    pub uavs: Vec<UavState>,
    members: Vec<Vec<usize>>,
}

impl World {
    /// Build a world; UAV `n` serves cluster `n`.
    pub fn new(
        arena: Arena,
        channel: ChannelParams,
        radio: RadioConfig,
        users: Vec<UserState>,
        uav_positions: Vec<GridPos>,
    ) -> Result<Self, WorldError> {
        arena.validate()?;
        channel.validate()?;
        if !(radio.bandwidth > 0.0 && radio.p_max > 0.0) {
            return Err(WorldError::InvalidRadio("bandwidth and p_max must be positive"));
        }
        let n = uav_positions.len();
        let mut members = vec![Vec::new(); n];
        for (idx, u) in users.iter().enumerate() {
            if u.cluster >= n {
                return Err(WorldError::BadAssignment {
                    user: idx,
                    cluster: u.cluster,
                    clusters: n,
                });
            }
            if !arena.contains_point(u.position) {
                return Err(WorldError::UserOutside(idx));
            }
            if !(u.snr_target > 0.0) {
                return Err(WorldError::BadSnrTarget(idx));
            }
            u.profile.validate()?;
            members[u.cluster].push(idx);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(WorldError::EmptyCluster(empty));
        }
        if let Some(bad) = uav_positions.iter().position(|g| !arena.contains(*g)) {
            return Err(WorldError::UavOutside(bad));
        }
        let uavs = uav_positions
            .into_iter()
            .enumerate()
            .map(|(id, grid)| UavState { id, grid, cluster: id })
            .collect();
        Ok(Self {
            arena,
            channel,
            radio,
            users,
            uavs,
            members,
        })
    }

    /// Re-cluster users under `partition`, placing UAVs above the snapped
    /// centroids at `level`.
    pub fn with_partition(&self, partition: &Partition, level: u32) -> Result<Self, WorldError> {
        let mut users = self.users.clone();
        for (u, &c) in users.iter_mut().zip(&partition.assignments) {
            u.cluster = c;
        }
        let h = self.arena.h_min + level as f64 * self.arena.grid_step_vertical;
        let positions = partition
            .centroids
            .iter()
            .map(|c| self.arena.snap(c.x, c.y, h))
            .collect();
        World::new(self.arena, self.channel, self.radio, users, positions)
    }

    pub fn cluster_count(&self) -> usize {
        self.members.len()
    }

    /// User indices of cluster `n`.
    pub fn members(&self, n: usize) -> &[usize] {
        &self.members[n]
    }

    pub fn user_positions(&self) -> Vec<Point2> {
        self.users.iter().map(|u| u.position).collect()
    }

    /// Equal split of cluster `n`'s bandwidth and power: `(B_n/K_n, P_max/K_n)`.
    pub fn allocate(&self, n: usize) -> Result<(f64, f64), WorldError> {
        let k = self.members.get(n).map_or(0, Vec::len);
        if k == 0 {
            return Err(WorldError::EmptyCluster(n));
        }
        Ok((self.radio.bandwidth / k as f64, self.radio.p_max / k as f64))
    }

    fn link(&self, user: usize, at: Position3, ground: Point2, bandwidth: f64, power: f64) -> UserLink {
        let u = &self.users[user];
        let geom = channel::link_geometry(at, Position3::ground(ground.x, ground.y))
            .expect("arena positions are finite and UAV altitude is positive");
        let gain = channel::channel_gain(geom, &self.channel);
        let snr = channel::snr(power, gain, bandwidth, &self.channel);
        let rate = channel::rate(power, gain, bandwidth, &self.channel);
        let sigma2 = self.channel.noise_power(bandwidth);
        UserLink {
            user,
            cluster: u.cluster,
            distance: geom.distance,
            snr,
            rate,
            mos: link_mos(rate, &u.profile),
            snr_ok: snr >= u.snr_target,
            required_power: channel::min_transmit_power(geom.distance, u.snr_target, sigma2, &self.channel),
            allocated_power: power,
        }
    }

    fn cluster_mos_with(&self, n: usize, at: GridPos, ground: impl Fn(usize) -> Point2) -> f64 {
        let members = &self.members[n];
        let k = members.len() as f64;
        let (bandwidth, power) = (self.radio.bandwidth / k, self.radio.p_max / k);
        let pos = self.arena.position(at);
        members
            .iter()
            .map(|&u| self.link(u, pos, ground(u), bandwidth, power).mos)
            .sum()
    }

    /// Sum MOS of cluster `n` with its UAV at `at` and users at `positions`
    /// (indexed by user).
    pub fn cluster_mos_at(&self, n: usize, at: GridPos, positions: &[Point2]) -> f64 {
        self.cluster_mos_with(n, at, |u| positions[u])
    }

    /// Cluster MOS at the users' current positions.
    pub fn cluster_mos(&self, n: usize, at: GridPos) -> f64 {
        self.cluster_mos_with(n, at, |u| self.users[u].position)
    }

    /// Total MOS for a full set of UAV positions at the current user positions.
    pub fn total_mos(&self, positions: &[GridPos]) -> f64 {
        positions.iter().enumerate().map(|(n, &g)| self.cluster_mos(n, g)).sum()
    }

    pub fn snapshot(&self) -> Snapshot {
        self.snapshot_with(&self.uavs.iter().map(|u| u.grid).collect::<Vec<_>>(), &self.user_positions())
    }

    /// Snapshot with UAVs at `uav_positions` and users at `user_positions`.
    pub fn snapshot_with(&self, uav_positions: &[GridPos], user_positions: &[Point2]) -> Snapshot {
        let mut links = Vec::with_capacity(self.users.len());
        let mut cluster_mos = vec![0.0; self.members.len()];
        for (n, members) in self.members.iter().enumerate() {
            let k = members.len() as f64;
            let (bandwidth, power) = (self.radio.bandwidth / k, self.radio.p_max / k);
            let pos = self.arena.position(uav_positions[n]);
            for &u in members {
                let l = self.link(u, pos, user_positions[u], bandwidth, power);
                cluster_mos[n] += l.mos;
                links.push(l);
            }
        }
        links.sort_by_key(|l| l.user);
        let total_mos = links.iter().map(|l| l.mos).sum();
        let sum_rate = links.iter().map(|l| l.rate).sum();
        Snapshot {
            users: links,
            cluster_mos,
            total_mos,
            sum_rate,
        }
    }

    pub fn uav_positions(&self) -> Vec<GridPos> {
        self.uavs.iter().map(|u| u.grid).collect()
    }

    pub fn set_uav_positions(&mut self, positions: &[GridPos]) {
        for (u, &g) in self.uavs.iter_mut().zip(positions) {
            debug_assert!(self.arena.contains(g));
            u.grid = g;
        }
    }
}
