//! Cell partition of ground users.
//!
//! [`kmeans`] is plain Lloyd iteration from seeded random centroids.
//! [`gak_means`] runs a small genetic algorithm over centroid sets: each
//! generation applies one Lloyd step to every chromosome, mutates
//! centroids toward randomly drawn users, and resamples the population by
//! fitness `1 / (1 + SSE)` while keeping the best chromosome intact. The
//! seeded K-means solution is planted in the initial population, so the GA
//! never ends worse than K-means with the same seed.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lloyd iteration cap.
pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("cluster count must be in 1..={users}, got {requested}")]
    BadClusterCount { requested: usize, users: usize },
    #[error("invalid GA config: {0}")]
    InvalidConfig(&'static str),
}

/// A horizontal position in m.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Cluster index of every user.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Point2>,
}

impl Partition {
    pub fn cluster_count(&self) -> usize {
        self.centroids.len()
    }

    /// User indices of every cluster, in ascending user order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centroids.len()];
        for (user, &c) in self.assignments.iter().enumerate() {
            out[c].push(user);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub partition: Partition,
    pub sse: f64,
    /// Lloyd iterations (K-means) or generations run (GAK-means).
    pub iterations: usize,
    /// Point-to-centroid distance evaluations performed.
    pub distance_evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 50,
            mutation_rate: 0.05,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        // a population of one is allowed: it reduces the GA to K-means
        if self.population_size == 0 {
            return Err(ClusterError::InvalidConfig("population_size must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(ClusterError::InvalidConfig("mutation_rate must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Sum of squared distances of every user to its assigned centroid.
pub fn sse(users: &[Point2], partition: &Partition) -> f64 {
    users
        .iter()
        .zip(&partition.assignments)
        .map(|(u, &c)| u.dist2(partition.centroids[c]))
        .sum()
}

fn check_count(users: &[Point2], n: usize) -> Result<(), ClusterError> {
    if n == 0 || n > users.len() {
        return Err(ClusterError::BadClusterCount {
            requested: n,
            users: users.len(),
        });
    }
    Ok(())
}

/// Nearest centroid, ties to the lowest index.
fn nearest(p: Point2, centroids: &[Point2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = p.dist2(*c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Lloyd state for one centroid set.
struct Lloyd<'a> {
    users: &'a [Point2],
    evaluations: u64,
}

impl<'a> Lloyd<'a> {
    fn new(users: &'a [Point2]) -> Self {
        Self { users, evaluations: 0 }
    }

    fn assign(&mut self, centroids: &[Point2]) -> Vec<usize> {
        self.evaluations += (self.users.len() * centroids.len()) as u64;
        self.users.iter().map(|&u| nearest(u, centroids)).collect()
    }

    /// Move every centroid to the mean of its users. An empty cluster is
    /// re-seeded at the user farthest from its own centroid, and that user
    /// joins it.
    fn update(&mut self, centroids: &mut [Point2], assignments: &mut [usize]) {
        let n = centroids.len();
        loop {
            let mut sums = vec![(0.0, 0.0, 0usize); n];
            for (u, &c) in self.users.iter().zip(assignments.iter()) {
                sums[c].0 += u.x;
                sums[c].1 += u.y;
                sums[c].2 += 1;
            }
            let Some(empty) = sums.iter().position(|s| s.2 == 0) else {
                for (c, (sx, sy, k)) in centroids.iter_mut().zip(sums) {
                    *c = Point2::new(sx / k as f64, sy / k as f64);
                }
                return;
            };
            // farthest user among clusters that can spare one
            let mut far = None;
            let mut far_d = -1.0;
            for (i, u) in self.users.iter().enumerate() {
                let c = assignments[i];
                if sums[c].2 < 2 {
                    continue;
                }
                let d = u.dist2(centroids[c]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
            self.evaluations += self.users.len() as u64;
            let far = far.expect("n <= user count leaves a cluster with >= 2 users");
            centroids[empty] = self.users[far];
            assignments[far] = empty;
        }
    }

    /// One assign + update pass. Returns the new assignments.
    fn step(&mut self, centroids: &mut [Point2]) -> Vec<usize> {
        let mut a = self.assign(centroids);
        self.update(centroids, &mut a);
        a
    }

    /// Iterate until assignments stop changing or the cap is hit.
    fn converge(&mut self, mut centroids: Vec<Point2>) -> (Partition, usize) {
        let mut assignments = self.step(&mut centroids);
        let mut iterations = 1;
        while iterations < MAX_LLOYD_ITERATIONS {
            let next = self.step(&mut centroids);
            iterations += 1;
            if next == assignments {
                break;
            }
            assignments = next;
        }
        (Partition { assignments, centroids }, iterations)
    }
}

/// `n` distinct users drawn uniformly as initial centroids.
fn random_centroids(users: &[Point2], n: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let mut idx = sample(rng, users.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| users[i]).collect()
}

/// Lloyd K-means from seeded random initial centroids.
pub fn kmeans(users: &[Point2], n: usize, seed: u64) -> Result<Clustering, ClusterError> {
    check_count(users, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = random_centroids(users, n, &mut rng);
    let mut lloyd = Lloyd::new(users);
    let (partition, iterations) = lloyd.converge(init);
    let sse = sse(users, &partition);
    Ok(Clustering {
        partition,
        sse,
        iterations,
        distance_evaluations: lloyd.evaluations,
    })
}

/// Re-run Lloyd from the given centroids.
pub fn refine(users: &[Point2], centroids: Vec<Point2>) -> Result<Clustering, ClusterError> {
    check_count(users, centroids.len())?;
    let mut lloyd = Lloyd::new(users);
    let (partition, iterations) = lloyd.converge(centroids);
    let sse = sse(users, &partition);
    Ok(Clustering {
        partition,
        sse,
        iterations,
        distance_evaluations: lloyd.evaluations,
    })
}

fn centroid_sse(lloyd: &mut Lloyd<'_>, centroids: &[Point2]) -> f64 {
    let a = lloyd.assign(centroids);
    lloyd
        .users
        .iter()
        .zip(a)
        .map(|(u, c)| u.dist2(centroids[c]))
        .sum()
}

/// Genetic-algorithm-boosted K-means.
pub fn gak_means(users: &[Point2], n: usize, config: &GaConfig) -> Result<Clustering, ClusterError> {
    check_count(users, n)?;
    config.validate()?;

    let seeded = kmeans(users, n, config.rng_seed)?;
    let mut evaluations = seeded.distance_evaluations;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(1);

    let mut population: Vec<Vec<Point2>> = Vec::with_capacity(config.population_size);
    population.push(seeded.partition.centroids.clone());
    while population.len() < config.population_size {
        population.push(random_centroids(users, n, &mut rng));
    }

    let mut lloyd = Lloyd::new(users);
    let mut scores = vec![0.0; population.len()];
    for _ in 0..config.generations {
        // K-means operator
        for chromosome in population.iter_mut() {
            lloyd.step(chromosome);
        }
        for (s, c) in scores.iter_mut().zip(&population) {
            *s = centroid_sse(&mut lloyd, c);
        }
        let elite = argmin(&scores);

        // mutation operator, elite untouched
        for (i, chromosome) in population.iter_mut().enumerate() {
            if i == elite {
                continue;
            }
            for c in chromosome.iter_mut() {
                if rng.gen::<f64>() < config.mutation_rate {
                    let target = users[rng.gen_range(0..users.len())];
                    let t: f64 = rng.gen();
                    c.x += t * (target.x - c.x);
                    c.y += t * (target.y - c.y);
                }
            }
        }
        for (s, c) in scores.iter_mut().zip(&population) {
            *s = centroid_sse(&mut lloyd, c);
        }

        // fitness-proportional selection with elitism
        let fitness: Vec<f64> = scores.iter().map(|s| 1.0 / (1.0 + s)).collect();
        let total: f64 = fitness.iter().sum();
        let mut next = Vec::with_capacity(population.len());
        next.push(population[elite].clone());
        while next.len() < population.len() {
            let mut pick = rng.gen::<f64>() * total;
            let mut chosen = fitness.len() - 1;
            for (i, f) in fitness.iter().enumerate() {
                if pick < *f {
                    chosen = i;
                    break;
                }
                pick -= f;
            }
            next.push(population[chosen].clone());
        }
        population = next;
    }

    // population[0] is the elite of the last generation
    let mut best: Option<Clustering> = None;
    for chromosome in &population {
        let candidate = refine(users, chromosome.clone())?;
        evaluations += candidate.distance_evaluations;
        if best.as_ref().map_or(true, |b| candidate.sse < b.sse) {
            best = Some(candidate);
        }
    }
    let mut best = best.expect("population is non-empty");
    if seeded.sse < best.sse {
        best = seeded;
    }
    best.iterations = config.generations;
    best.distance_evaluations = evaluations + lloyd.evaluations;
    Ok(best)
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
        ]
    }

    #[test]
    fn unit_square_optimum() {
        let users = square();
        let best = (0..20)
            .map(|s| gak_means(&users, 2, &GaConfig { rng_seed: s, ..Default::default() }).unwrap().sse)
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(best, 1.0, max_relative = 1e-12);
        // some seed lands on an adjacent pairing with plain K-means too
        let km = (0..20).map(|s| kmeans(&users, 2, s).unwrap().sse).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(km, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn coincident_users() {
        let users = vec![Point2::new(3.0, 4.0); 6];
        let c = kmeans(&users, 2, 7).unwrap();
        assert_eq!(c.sse, 0.0);
        let c = kmeans(&users, 1, 7).unwrap();
        assert_eq!(c.partition.centroids, vec![Point2::new(3.0, 4.0)]);
    }

    #[test]
    fn single_cluster_is_mean() {
        let users = vec![Point2::new(0.0, 0.0), Point2::new(4.0, 0.0), Point2::new(2.0, 6.0)];
        let cfg = GaConfig { mutation_rate: 0.9, rng_seed: 3, ..Default::default() };
        let c = gak_means(&users, 1, &cfg).unwrap();
        assert_relative_eq!(c.partition.centroids[0].x, 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.partition.centroids[0].y, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn ga_disabled_degenerates_to_kmeans() {
        let users: Vec<Point2> = (0..30)
            .map(|i| Point2::new((i * 37 % 101) as f64, (i * 53 % 97) as f64))
            .collect();
        let cfg = GaConfig { population_size: 1, mutation_rate: 0.0, generations: 10, rng_seed: 11 };
        let ga = gak_means(&users, 4, &cfg).unwrap();
        let km = kmeans(&users, 4, 11).unwrap();
        assert_eq!(ga.partition, km.partition);
        assert_eq!(ga.sse, km.sse);
    }

    #[test]
    fn bad_counts_rejected() {
        let users = square();
        assert!(kmeans(&users, 0, 1).is_err());
        assert!(kmeans(&users, 5, 1).is_err());
        let bad = GaConfig { mutation_rate: 1.5, ..Default::default() };
        assert!(gak_means(&users, 2, &bad).is_err());
    }

    #[test]
    fn empty_cluster_repair_keeps_every_cluster_populated() {
        // two far groups, three centroids seeded inside one group
        let mut users = vec![Point2::new(0.0, 0.0); 3];
        users.extend([Point2::new(100.0, 0.0), Point2::new(101.0, 0.0), Point2::new(102.0, 0.0)]);
        let c = refine(&users, vec![Point2::new(0.0, 0.0), Point2::new(0.1, 0.0), Point2::new(0.2, 0.0)])
            .unwrap();
        let members = c.partition.members();
        assert!(members.iter().all(|m| !m.is_empty()));
    }

    fn arb_users() -> impl Strategy<Value = Vec<Point2>> {
        prop::collection::vec((0.0..1000.0f64, 0.0..1000.0f64), 6..40)
            .prop_map(|v| v.into_iter().map(|(x, y)| Point2::new(x, y)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gak_never_worse_than_kmeans(users in arb_users(), n in 1usize..5, seed in 0u64..1000) {
            let n = n.min(users.len());
            let km = kmeans(&users, n, seed).unwrap();
            let ga = gak_means(&users, n, &GaConfig { rng_seed: seed, ..Default::default() }).unwrap();
            prop_assert!(ga.sse <= km.sse);
        }

        #[test]
        fn kmeans_idempotent(users in arb_users(), n in 1usize..5, seed in 0u64..1000) {
            let n = n.min(users.len());
            let km = kmeans(&users, n, seed).unwrap();
            let again = refine(&users, km.partition.centroids.clone()).unwrap();
            prop_assert_eq!(&again.partition.assignments, &km.partition.assignments);
            prop_assert_eq!(again.sse, km.sse);
        }

        #[test]
        fn deterministic(users in arb_users(), seed in 0u64..1000) {
            let cfg = GaConfig { rng_seed: seed, generations: 10, ..Default::default() };
            let a = gak_means(&users, 3.min(users.len()), &cfg).unwrap();
            let b = gak_means(&users, 3.min(users.len()), &cfg).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn centroids_are_means(users in arb_users(), seed in 0u64..1000) {
            let km = kmeans(&users, 3.min(users.len()), seed).unwrap();
            for (c, members) in km.partition.members().iter().enumerate() {
                let k = members.len() as f64;
                let mx = members.iter().map(|&i| users[i].x).sum::<f64>() / k;
                let my = members.iter().map(|&i| users[i].y).sum::<f64>() / k;
                prop_assert!((mx - km.partition.centroids[c].x).abs() < 1e-9);
                prop_assert!((my - km.partition.centroids[c].y).abs() < 1e-9);
            }
        }
    }
}
