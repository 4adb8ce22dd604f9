//! Every example with an independently derived expected value, as a check
//! that reports instead of panicking. The numeric constants come from
//! `tests/oracle/derive_values.py`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_qoe::baselines;
use uav_qoe::channel::{self, AltitudeFloor, ChannelParams, LinkGeometry, Position3};
use uav_qoe::clustering::{self, GaConfig, Point2};
use uav_qoe::qoe::{self, MosProfile};
use uav_qoe::rl::{self, QLearnConfig};
use uav_qoe::scenario::generate_scenario;
use uav_qoe::world::{self, user_trajectory, Arena, GridPos, MobilityConfig, RadioConfig, World};

pub type Outcome = Result<String, String>;

pub const REL: f64 = 1e-9;

fn close(name: &str, got: f64, want: f64, rel: f64) -> Result<(), String> {
    let err = ((got - want) / want).abs();
    if err <= rel {
        Ok(())
    } else {
        Err(format!("{name}: got {got}, want {want} (rel err {err:.2e})"))
    }
}

/// Closed-form link, QoE and fixture values against the 50-digit script.
pub fn formula_values() -> Outcome {
    let p = ChannelParams::default();
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();

    let g = channel::link_geometry(Position3::new(120.0, -45.0, 150.0), Position3::ground(30.0, 10.0)).unwrap();
    checks.push(("distance", g.distance, 183.37120820892248241));
    checks.push(("elevation", g.elevation, 0.95794772756311337964));
    checks.push(("p_los overhead", channel::los_probability(PI / 2.0, &p), 0.9261757970179381612));
    checks.push(("k0", p.k0(), 7028.1061696634329871));

    let gain = channel::channel_gain(LinkGeometry { distance: 200.0, elevation: PI / 3.0 }, &p);
    checks.push(("gain d=200 60deg", gain, 1.1288696381094832474e-10));
    let (bw, pw) = (1e6 / 25.0, 0.1 / 25.0);
    checks.push(("snr", channel::snr(pw, gain, bw, &p), 1128.8696381094832474));
    checks.push(("rate", channel::rate(pw, gain, bw, &p), 405677.62447609327444));
    checks.push((
        "min power d=300",
        channel::min_transmit_power(300.0, 1.0, p.noise_power(40e3), &p),
        0.000050482495389347015785,
    ));

    let b = channel::altitude_bounds(250.0, 0.1, 10f64.powf(2.5), p.noise_power(1e6), &p);
    checks.push(("bounds S", b.power_ratio, 71.991574033260610538));
    match b.floor {
        AltitudeFloor::Bounded { altitude, .. } => checks.push(("bounds lower", altitude, 69.519170851941569623)),
        other => return Err(format!("bounds lower: expected a bounded floor, got {other:?}")),
    }
    checks.push(("bounds upper", b.upper, 1501.6919173511184637));

    let prof = MosProfile::default();
    checks.push(("delay 1 Mb/s", qoe::page_delay(1e6, &prof).unwrap(), 1.4637706479673736369));
    checks.push(("delay 500 kb/s", qoe::page_delay(5e5, &prof).unwrap(), 2.3961580608940797043));
    checks.push(("mos 500 kb/s", qoe::mos(5e5, &prof).unwrap().value(), 3.6958693556612916961));

    let w = super::fix10();
    let s = w.snapshot();
    checks.push(("fix10 cluster 0", s.cluster_mos[0], 15.912890592973394626));
    checks.push(("fix10 cluster 1", s.cluster_mos[1], 12.774826120459430027));
    checks.push(("fix10 total", s.total_mos, 28.687716713432824654));
    checks.push(("fix10 sum_mos", qoe::sum_mos(&w), 28.687716713432824654));
    checks.push(("fix10 sum rate", qoe::sum_rate(&w), 2282014.5619083763497));

    let s = super::fix20().snapshot();
    let clusters = [
        22.057724771350635763,
        22.069337998636427086,
        22.042932395889799073,
        21.972294756512163017,
    ];
    for (got, want) in s.cluster_mos.iter().zip(clusters) {
        checks.push(("fix20 cluster", *got, want));
    }
    checks.push(("fix20 total", s.total_mos, 88.14228992238902494));
    checks.push(("fix20 sum rate", s.sum_rate, 28119263.366797490732));
    checks.push(("fix20 user 19 mos", s.users[19].mos, 4.1714451862636663225));
    checks.push(("fix20 user 19 snr", s.users[19].snr, 21.397490497581539453));

    for (name, got, want) in &checks {
        close(name, *got, *want, REL)?;
    }
    Ok(format!("{} values within {REL:e}", checks.len()))
}

/// `page_delay` across the slow-start crossover `r RTT = FS / 2`.
pub fn delay_continuity() -> Outcome {
    let p = MosProfile::default();
    let cross = p.fs / (2.0 * p.rtt);
    let step = cross * 1e-7;
    let mut r = cross * (1.0 - 1e-4);
    let mut prev = qoe::page_delay(r, &p).unwrap();
    let mut worst: f64 = 0.0;
    while r < cross * (1.0 + 1e-4) {
        r += step;
        let d = qoe::page_delay(r, &p).unwrap();
        worst = worst.max((d - prev).abs());
        prev = d;
    }
    if worst < 1e-6 {
        Ok(format!("largest step {worst:.2e} s"))
    } else {
        Err(format!("delay jumps by {worst:e} s near the crossover"))
    }
}

/// U = 8, n = 2: K-means never beats the enumerated optimum and GAK-means
/// reaches it.
pub fn kmeans_vs_enumeration() -> Outcome {
    let mut hits = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let pts: Vec<Point2> = (0..8)
            .map(|_| Point2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let opt = super::optimal_sse(&pts, 2);
        let k = clustering::kmeans(&pts, 2, seed).unwrap().sse;
        if k < opt * (1.0 - 1e-12) {
            return Err(format!("seed {seed}: kmeans sse {k} below optimum {opt}"));
        }
        let g = clustering::gak_means(&pts, 2, &GaConfig { rng_seed: seed, ..GaConfig::default() }).unwrap().sse;
        if (g - opt).abs() <= 1e-9 * opt.max(1.0) {
            hits += 1;
        }
    }
    if hits == 20 {
        Ok("20/20 GAK-means at the optimum, K-means never below".into())
    } else {
        Err(format!("GAK-means hit the optimum on {hits}/20"))
    }
}

/// Four clusters of 25 users: the per-user shares add back to `(B_n, P_max)`.
pub fn allocation_sums() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<(f64, f64, usize)> = (0..100)
        .map(|i| (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0), i % 4))
        .collect();
    let w = World::new(
        Arena::default(),
        ChannelParams::default(),
        RadioConfig::default(),
        super::users_from(&pts),
        vec![GridPos::new(0, 0, 0); 4],
    )
    .unwrap();
    for n in 0..4 {
        let (b, p) = w.allocate(n).unwrap();
        let k = w.members(n).len();
        let (bs, ps): (f64, f64) = (0..k).fold((0.0, 0.0), |(x, y), _| (x + b, y + p));
        close("bandwidth sum", bs, 1e6, 1e-12)?;
        close("power sum", ps, 0.1, 1e-12)?;
    }
    Ok("4 clusters of 25 add back to 1 MHz / 0.1 W".into())
}

/// K-means placement of the 20-user fixture sits above the arithmetic means.
pub fn fixture_centroids() -> Outcome {
    let want = [(162.0, 258.0), (392.0, 428.0), (622.0, 598.0), (852.0, 768.0)];
    let w = super::fix20();
    let got = baselines::kmeans_deploy(&w).positions;
    let h = w.arena.position(GridPos::new(0, 0, w.arena.mid_level())).h;
    for (n, (x, y)) in want.iter().enumerate() {
        if got[n] != w.arena.snap(*x, *y, h) {
            return Err(format!("cluster {n}: {:?} is not above ({x}, {y})", got[n]));
        }
    }
    Ok("4 centroids".into())
}

/// IGK altitude search for one user against a 1-D scan.
pub fn single_user_altitude_scan() -> Outcome {
    let arena = Arena {
        grid_step_horizontal: 200.0,
        ..Arena::default()
    };
    let w = World::new(
        arena,
        ChannelParams::default(),
        RadioConfig { bandwidth: 1e6, p_max: 1e-4 },
        super::users_from(&[(299.0, 299.0, 0)]),
        vec![GridPos::new(0, 0, 0)],
    )
    .unwrap();
    let r = baselines::igk_deploy(&w, &GaConfig::default()).map_err(|e| e.to_string())?.result;
    if r.positions != vec![GridPos::new(1, 1, 3)] {
        return Err(format!("IGK chose {:?}, scan optimum is (1, 1, 3)", r.positions));
    }
    close("scan mos", r.total_mos, 4.2495674206513984701, REL)?;
    Ok("level 3 of 26".into())
}

/// One user on a 3x3x2 grid: Q-learning, exhaustive search and plain
/// enumeration agree.
pub fn tiny_grid_deployment() -> Outcome {
    let arena = Arena {
        x_max: 200.0,
        y_max: 200.0,
        h_min: 50.0,
        h_max: 100.0,
        grid_step_horizontal: 100.0,
        grid_step_vertical: 50.0,
        ..Arena::default()
    };
    let w = World::new(
        arena,
        ChannelParams::default(),
        RadioConfig { bandwidth: 1e6, p_max: 1e-4 },
        super::users_from(&[(130.0, 180.0, 0)]),
        vec![GridPos::new(0, 0, 0)],
    )
    .unwrap();
    let (oracle, _) = super::grid_optimum(&w, 0);
    let ex = baselines::exhaustive_deploy(&w, 100).map_err(|e| e.to_string())?;
    let q = rl::train_deployment(&w, &QLearnConfig { episodes: 500, ..QLearnConfig::default() })
        .map_err(|e| e.to_string())?;
    if ex.positions[0] != oracle || q.positions()[0] != oracle {
        return Err(format!(
            "enumeration {oracle:?}, exhaustive {:?}, q-learning {:?}",
            ex.positions[0],
            q.positions()[0]
        ));
    }
    Ok(format!("all at {oracle:?}"))
}

/// IGK on the 4-cluster fixture lands between K-means and exhaustive search.
pub fn igk_between_baselines() -> Outcome {
    let w = super::fix20();
    let k = baselines::kmeans_deploy(&w).total_mos;
    let igk = baselines::igk_deploy(&w, &GaConfig::default()).map_err(|e| e.to_string())?.result.total_mos;
    let ex = baselines::exhaustive_deploy(&w, 1_000_000).map_err(|e| e.to_string())?.total_mos;
    if k <= igk && igk <= ex {
        Ok(format!("{k:.4} <= {igk:.4} <= {ex:.4}"))
    } else {
        Err(format!("k-means {k}, igk {igk}, exhaustive {ex}"))
    }
}

/// Static-UAV trace of the 4-UAV fixture recomputed link by link.
pub fn static_trace_recomputed() -> Outcome {
    let mut w = super::fix20();
    w.arena.horizon = 20.0;
    let mob = MobilityConfig { c_max: 5.0, rng_seed: 0 };
    let pos = w.uav_positions();
    let trace = baselines::static_movement_baseline(&w, &pos, &mob, 9).map_err(|e| e.to_string())?;
    let users = user_trajectory(&w.users, &mob, &w.arena, 9, 20);
    for t in 1..=20 {
        let want: f64 = (0..4).map(|n| super::link_by_link_cluster_mos(&w, n, pos[n], &users[t])).sum();
        close("slot total", trace.total_mos[t - 1], want, REL)?;
    }
    Ok("20 slots".into())
}

/// 10^5 random-walk steps of one user: axis frequencies and speed law.
pub fn random_walk_statistics() -> Outcome {
    let arena = Arena {
        x_max: 1000.0,
        y_max: 1000.0,
        ..Arena::default()
    };
    let mob = MobilityConfig { c_max: 2.0, rng_seed: 0 };
    let mut users = super::users_from(&[(500.0, 500.0, 0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws = 100_000;
    let mut dirs = [0u64; 4];
    let mut speeds = Vec::with_capacity(draws);
    for _ in 0..draws {
        users[0].position = Point2::new(500.0, 500.0);
        world::step_users(&mut users, &mob, &arena, &mut rng);
        let (dx, dy) = (users[0].position.x - 500.0, users[0].position.y - 500.0);
        let d = match (dx.partial_cmp(&0.0), dy.partial_cmp(&0.0)) {
            (Some(std::cmp::Ordering::Less), _) => 0,
            (Some(std::cmp::Ordering::Greater), _) => 1,
            (_, Some(std::cmp::Ordering::Greater)) => 2,
            _ => 3,
        };
        dirs[d] += 1;
        speeds.push(dx.abs().max(dy.abs()) / arena.timeslot);
    }
    for (i, &c) in dirs.iter().enumerate() {
        let f = c as f64 / draws as f64;
        if (f - 0.25).abs() > 0.01 {
            return Err(format!("direction {i} frequency {f}"));
        }
    }
    let ks = super::ks_uniform(&mut speeds, mob.c_max);
    // 1.63 / sqrt(n) is the 1% critical value of the Kolmogorov distribution
    let crit = 1.63 / (draws as f64).sqrt();
    if ks > crit {
        return Err(format!("speed KS distance {ks} above {crit}"));
    }
    Ok(format!("directions {dirs:?}, KS {ks:.4} < {crit:.4}"))
}

/// Random deployment over 1000 seeds covers an 18-cell grid uniformly.
pub fn random_deploy_uniform() -> Outcome {
    let arena = Arena {
        x_max: 200.0,
        y_max: 200.0,
        h_min: 50.0,
        h_max: 100.0,
        grid_step_horizontal: 100.0,
        grid_step_vertical: 50.0,
        ..Arena::default()
    };
    let w = World::new(
        arena,
        ChannelParams::default(),
        RadioConfig::default(),
        super::users_from(&[(10.0, 10.0, 0)]),
        vec![GridPos::new(0, 0, 0)],
    )
    .unwrap();
    let mut counts = vec![0u64; arena.cell_count()];
    for seed in 0..1000 {
        counts[arena.cell_index(baselines::random_deploy(&w, seed).positions[0])] += 1;
    }
    let (stat, crit) = super::chi_square_uniform(&counts, 0.001);
    if stat < crit {
        Ok(format!("chi2 {stat:.2} < {crit:.2}"))
    } else {
        Err(format!("chi2 {stat} above {crit}"))
    }
}

/// 10^4 generated users over a 10x10 binning of the arena.
pub fn generated_users_uniform() -> Outcome {
    let s = generate_scenario(10_000, 4, Arena::default(), 5).map_err(|e| e.to_string())?;
    let mut counts = vec![0u64; 100];
    for u in &s.users {
        let i = ((u.x / 100.0) as usize).min(9);
        let j = ((u.y / 100.0) as usize).min(9);
        counts[i * 10 + j] += 1;
    }
    let (stat, crit) = super::chi_square_uniform(&counts, 0.001);
    if stat < crit {
        Ok(format!("chi2 {stat:.2} < {crit:.2}"))
    } else {
        Err(format!("chi2 {stat} above {crit}"))
    }
}

pub const ALL: &[(&str, fn() -> Outcome)] = &[
    ("formula values", formula_values),
    ("page delay continuity", delay_continuity),
    ("k-means vs enumeration", kmeans_vs_enumeration),
    ("allocation sums", allocation_sums),
    ("fixture centroids", fixture_centroids),
    ("single-user altitude scan", single_user_altitude_scan),
    ("3x3x2 deployment", tiny_grid_deployment),
    ("igk ordering", igk_between_baselines),
    ("static trace", static_trace_recomputed),
    ("random walk", random_walk_statistics),
    ("random deploy", random_deploy_uniform),
    ("generated users", generated_users_uniform),
];
