//! Experiment runner behind the `uav-qoe` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{self, Algorithm, BaselineError};
use crate::clustering;
use crate::report::{
    fmt_f64, write_csv_file, ReportRow, RewardRow, TimingRow, TrajectoryRow, UserRow, WarningRow,
};
use crate::rl::{self, MovementTrace};
use crate::scenario::{generate_scenario, Scenario, ScenarioError};
use crate::world::{Arena, GridPos, World};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Runtime(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Scenario(_) => 1,
            CliError::Runtime(_) | CliError::Output { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Power,
    Users,
    Clusters,
    Episodes,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::Power => "power",
            SweepAxis::Users => "users",
            SweepAxis::Clusters => "clusters",
            SweepAxis::Episodes => "episodes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Deploy,
    Move,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// A full experiment: every (seed, sweep value) cell runs every algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: PathBuf,
    pub mode: Mode,
    pub algorithms: Vec<Algorithm>,
    pub sweep: Option<Sweep>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub episodes: Option<usize>,
    pub epsilon: Option<f64>,
    /// Also write wall-clock times to `timings.csv`.
    pub timings: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Validation("seed list is empty".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(CliError::Validation("seeds must be distinct".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::Validation("no algorithm selected".into()));
        }
        let allowed: &[Algorithm] = match self.mode {
            Mode::Deploy => &Algorithm::DEPLOYMENT,
            Mode::Move => &MOVEMENT,
        };
        if let Some(a) = self.algorithms.iter().find(|a| !allowed.contains(a)) {
            return Err(CliError::Validation(format!("algorithm {a} is not available in this mode")));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Validation("sweep has no values".into()));
            }
            for v in &sweep.values {
                if !(*v > 0.0) || !v.is_finite() {
                    return Err(CliError::Validation(format!("sweep value {v} must be positive")));
                }
                if sweep.axis != SweepAxis::Power && v.fract() != 0.0 {
                    return Err(CliError::Validation(format!("{} sweep needs whole numbers, got {v}", sweep.axis.name())));
                }
            }
        }
        if let Some(e) = self.epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(CliError::Validation("epsilon must be in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

pub const MOVEMENT: [Algorithm; 3] = [Algorithm::QLearning, Algorithm::Static, Algorithm::Igk];

/// Everything one (seed, sweep value) cell emits.
#[derive(Debug, Default)]
struct CellOutput {
    reports: Vec<ReportRow>,
    users: Vec<UserRow>,
    trajectory: Vec<TrajectoryRow>,
    rewards: Vec<RewardRow>,
    warnings: Vec<WarningRow>,
    timings: Vec<TimingRow>,
}

struct Cell<'a> {
    experiment: &'a str,
    seed: u64,
    axis: &'a str,
    sweep_value: Option<f64>,
}

impl Cell<'_> {
    fn report(&self, algorithm: Algorithm, total_mos: f64, cluster_mos: Vec<f64>, sum_rate: f64, evaluations: u64) -> ReportRow {
        ReportRow {
            experiment: self.experiment.to_string(),
            seed: self.seed,
            algorithm: algorithm.to_string(),
            sweep_axis: self.axis.to_string(),
            sweep_value: self.sweep_value,
            total_mos,
            cluster_mos,
            sum_rate,
            evaluations,
        }
    }

    fn timing(&self, algorithm: Algorithm, wall_clock_s: f64) -> TimingRow {
        TimingRow {
            experiment: self.experiment.to_string(),
            seed: self.seed,
            algorithm: algorithm.to_string(),
            sweep_value: self.sweep_value,
            wall_clock_s,
        }
    }

    fn skipped(&self, algorithm: Algorithm, message: String) -> WarningRow {
        WarningRow {
            experiment: self.experiment.to_string(),
            seed: self.seed,
            algorithm: algorithm.to_string(),
            sweep_value: self.sweep_value,
            user: None,
            kind: "skipped",
            snr: None,
            snr_target: None,
            required_power: None,
            allocated_power: None,
            message,
        }
    }

    fn rewards(&self, phase: &'static str, traces: &[Vec<f64>], out: &mut Vec<RewardRow>) {
        for (uav, trace) in traces.iter().enumerate() {
            for (episode, &reward) in trace.iter().enumerate() {
                out.push(RewardRow {
                    experiment: self.experiment.to_string(),
                    seed: self.seed,
                    phase,
                    sweep_value: self.sweep_value,
                    uav,
                    episode,
                    reward,
                });
            }
        }
    }
}

/// Scenario for one cell: overrides, sweep value and seed applied.
fn cell_scenario(base: &Scenario, spec: &ExperimentSpec, seed: u64, value: Option<f64>) -> Result<Scenario, CliError> {
    let mut s = base.clone();
    if let Some(e) = spec.episodes {
        s.qlearning.episodes = e;
    }
    if let Some(e) = spec.epsilon {
        s.qlearning.epsilon = e;
    }
    if let (Some(sweep), Some(v)) = (&spec.sweep, value) {
        match sweep.axis {
            SweepAxis::Power => s.radio.p_max_dbm = v,
            SweepAxis::Users => {
                let n = v as usize;
                if n > s.users.len() {
                    return Err(CliError::Validation(format!(
                        "users sweep value {n} exceeds the {} users in the scenario",
                        s.users.len()
                    )));
                }
                s.users.truncate(n);
            }
            SweepAxis::Clusters => s.clusters = v as usize,
            SweepAxis::Episodes => s.qlearning.episodes = v as usize,
        }
    }
    s.qlearning.rng_seed = seed;
    s.clustering.rng_seed = seed;
    s.mobility.rng_seed = seed;
    s.validate()?;
    Ok(s)
}

/// GAK-means partition of the scenario's users, as a world.
pub fn clustered_world(s: &Scenario) -> Result<World, CliError> {
    let users = s.user_positions();
    let c = clustering::gak_means(&users, s.clusters, &s.clustering).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(s.world(&c.partition.assignments, &c.partition.centroids)?)
}

fn deployment_rows(world: &World, cell: &Cell, algorithm: Algorithm, positions: &[GridPos], evaluations: u64, out: &mut CellOutput) {
    let snap = world.snapshot_with(positions, &world.user_positions());
    for l in &snap.users {
        let p = world.users[l.user].position;
        out.users.push(UserRow {
            experiment: cell.experiment.to_string(),
            seed: cell.seed,
            algorithm: algorithm.to_string(),
            sweep_value: cell.sweep_value,
            user: l.user,
            cluster: l.cluster,
            x: p.x,
            y: p.y,
            distance: l.distance,
            snr: l.snr,
            rate: l.rate,
            mos: l.mos,
        });
        if l.allocated_power < l.required_power {
            out.warnings.push(WarningRow {
                experiment: cell.experiment.to_string(),
                seed: cell.seed,
                algorithm: algorithm.to_string(),
                sweep_value: cell.sweep_value,
                user: Some(l.user),
                kind: "power-short",
                snr: Some(l.snr),
                snr_target: Some(world.users[l.user].snr_target),
                required_power: Some(l.required_power),
                allocated_power: Some(l.allocated_power),
                message: if l.snr_ok {
                    "below the worst-case power bound, SNR target met".into()
                } else {
                    "SNR target missed".into()
                },
            });
        }
    }
    out.reports
        .push(cell.report(algorithm, snap.total_mos, snap.cluster_mos, snap.sum_rate, evaluations));
}

fn run_deploy_cell(s: &Scenario, spec: &ExperimentSpec, cell: &Cell) -> Result<CellOutput, CliError> {
    let world = clustered_world(s)?;
    let mut out = CellOutput::default();
    for &alg in &spec.algorithms {
        let started = std::time::Instant::now();
        let placed: Result<(Vec<GridPos>, u64), BaselineError> = match alg {
            Algorithm::QLearning => {
                let d = rl::train_deployment(&world, &s.qlearning).map_err(|e| CliError::Runtime(e.to_string()))?;
                let traces: Vec<Vec<f64>> = d.agents.iter().map(|a| a.episode_rewards.clone()).collect();
                cell.rewards("deploy", &traces, &mut out.rewards);
                let evals = d
                    .agents
                    .iter()
                    .enumerate()
                    .map(|(n, a)| a.mos_evaluations * world.members(n).len() as u64)
                    .sum();
                Ok((d.positions(), evals))
            }
            Algorithm::KMeans => {
                let r = baselines::kmeans_deploy(&world);
                Ok((r.positions, r.evaluations))
            }
            Algorithm::Igk => baselines::igk_deploy(&world, &s.clustering).map(|t| (t.result.positions, t.result.evaluations)),
            Algorithm::Exhaustive => baselines::exhaustive_deploy(&world, s.exhaustive_cap).map(|r| (r.positions, r.evaluations)),
            Algorithm::Random => {
                let r = baselines::random_deploy(&world, cell.seed);
                Ok((r.positions, r.evaluations))
            }
            Algorithm::Static => unreachable!("rejected by validation"),
        };
        match placed {
            Ok((positions, evals)) => {
                deployment_rows(&world, cell, alg, &positions, evals, &mut out);
                out.timings.push(cell.timing(alg, started.elapsed().as_secs_f64()));
            }
            Err(e @ BaselineError::CapExceeded { .. }) => out.warnings.push(cell.skipped(alg, e.to_string())),
            Err(e) => return Err(CliError::Runtime(e.to_string())),
        }
    }
    Ok(out)
}

fn movement_rows(world: &World, cell: &Cell, algorithm: Algorithm, trace: &MovementTrace, out: &mut CellOutput) {
    let arena = &world.arena;
    for (t, slot_positions) in trace.positions.iter().enumerate() {
        let per: Vec<f64> = if t == 0 {
            slot_positions
                .iter()
                .enumerate()
                .map(|(n, &g)| world.cluster_mos_at(n, g, &trace.user_positions[0]))
                .collect()
        } else {
            trace.cluster_mos[t - 1].clone()
        };
        let total = if t == 0 { per.iter().sum() } else { trace.total_mos[t - 1] };
        for (n, &g) in slot_positions.iter().enumerate() {
            let p = arena.position(g);
            out.trajectory.push(TrajectoryRow {
                experiment: cell.experiment.to_string(),
                seed: cell.seed,
                algorithm: algorithm.to_string(),
                sweep_value: cell.sweep_value,
                time: t as f64 * arena.timeslot,
                uav: n,
                x: p.x,
                y: p.y,
                h: p.h,
                cluster: n,
                cluster_mos: per[n],
                total_mos: total,
            });
        }
    }
    let n = world.cluster_count();
    let mut cluster_sum = vec![0.0; n];
    for per in &trace.cluster_mos {
        for (acc, v) in cluster_sum.iter_mut().zip(per) {
            *acc += v;
        }
    }
    let sum_rate = (1..trace.positions.len())
        .map(|t| world.snapshot_with(&trace.positions[t], &trace.user_positions[t]).sum_rate)
        .sum();
    out.reports
        .push(cell.report(algorithm, trace.horizon_sum(), cluster_sum, sum_rate, 0));
}

fn run_move_cell(s: &Scenario, spec: &ExperimentSpec, cell: &Cell) -> Result<CellOutput, CliError> {
    let world = clustered_world(s)?;
    let mut out = CellOutput::default();
    let runtime = |e: rl::RlError| CliError::Runtime(e.to_string());
    let deployment = rl::train_deployment(&world, &s.qlearning).map_err(runtime)?;
    let traces: Vec<Vec<f64>> = deployment.agents.iter().map(|a| a.episode_rewards.clone()).collect();
    cell.rewards("deploy", &traces, &mut out.rewards);
    let start = deployment.positions();

    for &alg in &spec.algorithms {
        let started = std::time::Instant::now();
        let trace = match alg {
            Algorithm::QLearning => {
                let policy = rl::train_movement(&world, &start, &s.mobility, cell.seed, &s.qlearning).map_err(runtime)?;
                cell.rewards("move", &policy.episode_rewards, &mut out.rewards);
                rl::test_movement(&world, &start, &policy, &s.mobility, cell.seed).map_err(runtime)?
            }
            Algorithm::Static => baselines::static_movement_baseline(&world, &start, &s.mobility, cell.seed)
                .map_err(|e| CliError::Runtime(e.to_string()))?,
            Algorithm::Igk => {
                match baselines::igk_movement_baseline(&world, &start, &s.mobility, cell.seed, s.exhaustive_cap) {
                    Ok(t) => t,
                    Err(e @ BaselineError::CapExceeded { .. }) => {
                        out.warnings.push(cell.skipped(alg, e.to_string()));
                        continue;
                    }
                    Err(e) => return Err(CliError::Runtime(e.to_string())),
                }
            }
            _ => unreachable!("rejected by validation"),
        };
        movement_rows(&world, cell, alg, &trace, &mut out);
        out.timings.push(cell.timing(alg, started.elapsed().as_secs_f64()));
    }
    Ok(out)
}

/// Paths of the files written by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub report: PathBuf,
    pub users: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub rewards: PathBuf,
    pub warnings: PathBuf,
    pub timings: Option<PathBuf>,
}

fn write<T: crate::report::CsvRow>(path: PathBuf, rows: &[T]) -> Result<PathBuf, CliError> {
    write_csv_file(&path, rows).map_err(|e| CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(path)
}

fn experiment_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into())
}

/// Run every (seed, sweep value) cell, in parallel, and write the CSVs.
pub fn run(spec: &ExperimentSpec) -> Result<RunFiles, CliError> {
    spec.validate()?;
    let base = Scenario::load(&spec.scenario)?;
    let experiment = experiment_name(&spec.scenario);
    let values: Vec<Option<f64>> = match &spec.sweep {
        Some(s) => s.values.iter().map(|v| Some(*v)).collect(),
        None => vec![None],
    };
    let axis = spec.sweep.as_ref().map(|s| s.axis.name()).unwrap_or("");
    let cells: Vec<(u64, Option<f64>)> = spec
        .seeds
        .iter()
        .flat_map(|&seed| values.iter().map(move |&v| (seed, v)))
        .collect();
    let scenarios = cells
        .iter()
        .map(|&(seed, v)| cell_scenario(&base, spec, seed, v))
        .collect::<Result<Vec<_>, _>>()?;

    let outputs = cells
        .par_iter()
        .zip(scenarios.par_iter())
        .map(|(&(seed, sweep_value), s)| {
            let cell = Cell {
                experiment: &experiment,
                seed,
                axis,
                sweep_value,
            };
            match spec.mode {
                Mode::Deploy => run_deploy_cell(s, spec, &cell),
                Mode::Move => run_move_cell(s, spec, &cell),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut all = CellOutput::default();
    for o in outputs {
        all.reports.extend(o.reports);
        all.users.extend(o.users);
        all.trajectory.extend(o.trajectory);
        all.rewards.extend(o.rewards);
        all.warnings.extend(o.warnings);
        all.timings.extend(o.timings);
    }

    std::fs::create_dir_all(&spec.out).map_err(|e| CliError::Output {
        path: spec.out.display().to_string(),
        message: e.to_string(),
    })?;
    let dir = &spec.out;
    Ok(RunFiles {
        report: write(dir.join("report.csv"), &all.reports)?,
        users: match spec.mode {
            Mode::Deploy => Some(write(dir.join("users.csv"), &all.users)?),
            Mode::Move => None,
        },
        trajectory: match spec.mode {
            Mode::Move => Some(write(dir.join("trajectory.csv"), &all.trajectory)?),
            Mode::Deploy => None,
        },
        rewards: write(dir.join("episode_rewards.csv"), &all.rewards)?,
        warnings: write(dir.join("warnings.csv"), &all.warnings)?,
        timings: if spec.timings {
            Some(write(dir.join("timings.csv"), &all.timings)?)
        } else {
            None
        },
    })
}

/// Write the GAK-means partition of a scenario: `clusters.csv` with one row
/// per user and `centroids.csv` with one row per cluster.
pub fn run_cluster(scenario: &Path, seed: Option<u64>, out: &Path) -> Result<f64, CliError> {
    let mut s = Scenario::load(scenario)?;
    if let Some(seed) = seed {
        s.clustering.rng_seed = seed;
    }
    let users = s.user_positions();
    let c = clustering::gak_means(&users, s.clusters, &s.clustering).map_err(|e| CliError::Validation(e.to_string()))?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Output {
        path: out.display().to_string(),
        message: e.to_string(),
    })?;
    let err = |p: &Path, e: csv::Error| CliError::Output {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    let path = out.join("clusters.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| err(&path, e))?;
    w.write_record(["user", "x", "y", "cluster"]).map_err(|e| err(&path, e))?;
    for (i, (p, c)) in users.iter().zip(&c.partition.assignments).enumerate() {
        w.write_record([i.to_string(), fmt_f64(p.x), fmt_f64(p.y), c.to_string()])
            .map_err(|e| err(&path, e))?;
    }
    w.flush().map_err(|e| err(&path, csv::Error::from(e)))?;

    let path = out.join("centroids.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| err(&path, e))?;
    w.write_record(["cluster", "x", "y", "size"]).map_err(|e| err(&path, e))?;
    let members = c.partition.members();
    for (n, p) in c.partition.centroids.iter().enumerate() {
        w.write_record([n.to_string(), fmt_f64(p.x), fmt_f64(p.y), members[n].len().to_string()])
            .map_err(|e| err(&path, e))?;
    }
    w.flush().map_err(|e| err(&path, csv::Error::from(e)))?;
    Ok(c.sse)
}

#[derive(Debug, Parser)]
#[command(name = "uav-qoe", version, about = "QoE-driven UAV base station placement and movement experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a scenario with uniformly placed users.
    Generate(GenerateArgs),
    /// Partition a scenario's users with GAK-means.
    Cluster(ClusterArgs),
    /// Static-user deployment with the selected algorithms.
    Deploy(RunArgs),
    /// Deployment followed by movement over the horizon with roaming users.
    Move(RunArgs),
    /// Repeat deploy or move runs over a parameter sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, env = "UAVQOE_USERS")]
    pub users: usize,
    #[arg(long, env = "UAVQOE_UAVS")]
    pub uavs: usize,
    #[arg(long, env = "UAVQOE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "UAVQOE_X_MAX", default_value_t = 1000.0)]
    pub x_max: f64,
    #[arg(long, env = "UAVQOE_Y_MAX", default_value_t = 1000.0)]
    pub y_max: f64,
    /// Output scenario file.
    #[arg(long, env = "UAVQOE_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, env = "UAVQOE_SCENARIO")]
    pub scenario: PathBuf,
    #[arg(long, env = "UAVQOE_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "UAVQOE_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, env = "UAVQOE_SCENARIO")]
    pub scenario: PathBuf,
    /// Comma-separated algorithms, or `all`.
    #[arg(long, env = "UAVQOE_ALGO", value_delimiter = ',', default_value = "all")]
    pub algo: Vec<String>,
    /// Comma-separated seeds.
    #[arg(long, env = "UAVQOE_SEED", value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    /// Output directory.
    #[arg(long, env = "UAVQOE_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "UAVQOE_EPISODES")]
    pub episodes: Option<usize>,
    #[arg(long, env = "UAVQOE_EPSILON")]
    pub epsilon: Option<f64>,
    /// Also write wall-clock times to timings.csv.
    #[arg(long, env = "UAVQOE_TIMINGS")]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, env = "UAVQOE_AXIS", value_enum)]
    pub axis: SweepAxis,
    /// Comma-separated sweep values (dBm for power).
    #[arg(long, env = "UAVQOE_VALUES", value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, env = "UAVQOE_MODE", value_enum, default_value = "deploy")]
    pub mode: Mode,
}

fn parse_algorithms(names: &[String], mode: Mode) -> Result<Vec<Algorithm>, CliError> {
    if names.len() == 1 && names[0] == "all" {
        return Ok(match mode {
            Mode::Deploy => Algorithm::DEPLOYMENT.to_vec(),
            Mode::Move => MOVEMENT.to_vec(),
        });
    }
    names
        .iter()
        .map(|n| n.parse::<Algorithm>().map_err(CliError::Validation))
        .collect()
}

fn spec_from(args: RunArgs, mode: Mode, sweep: Option<Sweep>) -> Result<ExperimentSpec, CliError> {
    Ok(ExperimentSpec {
        algorithms: parse_algorithms(&args.algo, mode)?,
        scenario: args.scenario,
        mode,
        sweep,
        seeds: args.seed,
        out: args.out,
        episodes: args.episodes,
        epsilon: args.epsilon,
        timings: args.timings,
    })
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Generate(a) => {
            let arena = Arena {
                x_max: a.x_max,
                y_max: a.y_max,
                ..Arena::default()
            };
            let s = generate_scenario(a.users, a.uavs, arena, a.seed)?;
            std::fs::write(&a.out, s.to_json()).map_err(|e| CliError::Output {
                path: a.out.display().to_string(),
                message: e.to_string(),
            })?;
            Ok(format!("wrote {}", a.out.display()))
        }
        Command::Cluster(a) => {
            let sse = run_cluster(&a.scenario, a.seed, &a.out)?;
            Ok(format!("sse {}", fmt_f64(sse)))
        }
        Command::Deploy(a) => {
            let files = run(&spec_from(a, Mode::Deploy, None)?)?;
            Ok(format!("wrote {}", files.report.display()))
        }
        Command::Move(a) => {
            let files = run(&spec_from(a, Mode::Move, None)?)?;
            Ok(format!("wrote {}", files.report.display()))
        }
        Command::Sweep(a) => {
            let sweep = Sweep {
                axis: a.axis,
                values: a.values,
            };
            let files = run(&spec_from(a.run, a.mode, Some(sweep))?)?;
            Ok(format!("wrote {}", files.report.display()))
        }
    }
}

/// Parse arguments, run, print, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
