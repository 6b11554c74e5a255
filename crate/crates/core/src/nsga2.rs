//! NSGA-II over continuous genomes in the unit cube.
//!
//! Genomes live in `[0, 1]^D` and are decoded to grid designs only at
//! evaluation time, so crossover and mutation operate on the smooth
//! embedding while every fitness value belongs to a real design. One run
//! performs exactly `population_size * (generations + 1)` fitness calls: the
//! initial population plus one offspring batch per generation.
//!
//! Randomness is confined to the sequential parts (initialization,
//! selection, variation); fitness batches may run in parallel without
//! affecting results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::space::{DesignPoint, DesignSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct Nsga2Config {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    /// SBX distribution index; larger values keep children near parents.
    pub crossover_index: f64,
    /// Per-gene mutation probability; `None` means `1 / dimension`.
    pub mutation_probability: Option<f64>,
    /// Polynomial-mutation distribution index.
    pub mutation_index: f64,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            population_size: 100,
            generations: 20,
            crossover_probability: 0.9,
            crossover_index: 15.0,
            mutation_probability: None,
            mutation_index: 20.0,
            seed: 0,
        }
    }
}

impl Nsga2Config {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(Error::validation(
                "population size must be even and at least 4",
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return Err(Error::validation("crossover probability must be in [0, 1]"));
        }
        if let Some(pm) = self.mutation_probability {
            if !(0.0..=1.0).contains(&pm) {
                return Err(Error::validation("mutation probability must be in [0, 1]"));
            }
        }
        if !(self.crossover_index.is_finite() && self.crossover_index > 0.0)
            || !(self.mutation_index.is_finite() && self.mutation_index > 0.0)
        {
            return Err(Error::validation("distribution indices must be positive"));
        }
        Ok(())
    }
}

/// A population member after the final generation.
#[derive(Clone, Debug)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub fitness: Vec<f64>,
    pub rank: usize,
    pub crowding: f64,
}

/// Result of one evolutionary run.
#[derive(Clone, Debug)]
pub struct EvolveOutcome {
    pub population: Vec<Individual>,
    /// Rank-0 designs with their fitness vectors, duplicates removed.
    pub front: Vec<(DesignPoint, Vec<f64>)>,
    /// Exact number of fitness calls made.
    pub evaluations: usize,
    /// Every (design, fitness) evaluation in batch order: the initial
    /// population first, then one batch per generation.
    pub trace: Vec<(DesignPoint, Vec<f64>)>,
}

/// Fast non-dominated sort (minimization). Returns fronts as index lists;
/// front 0 is the non-dominated set of the whole input.
pub fn fast_non_dominated_sort(fitnesses: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    let n = fitnesses.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = fitnesses[0].len();
    for (i, f) in fitnesses.iter().enumerate() {
        if f.len() != m {
            return Err(Error::validation(format!(
                "fitness {i} has {} objectives but fitness 0 has {m}",
                f.len()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!("fitness {i} must be finite")));
        }
    }

    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dominator_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if crate::pareto::dominates_unchecked(&fitnesses[i], &fitnesses[j]) {
                dominated_by[i].push(j);
                dominator_count[j] += 1;
            } else if crate::pareto::dominates_unchecked(&fitnesses[j], &fitnesses[i]) {
                dominated_by[j].push(i);
                dominator_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominator_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                dominator_count[j] -= 1;
                if dominator_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    Ok(fronts)
}

/// Crowding distance within one front. Boundary points on any objective get
/// infinity; interior points accumulate the normalized span between their
/// neighbors per objective. Objectives with zero range contribute nothing.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut distance = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..m {
        order.sort_by(|&a, &b| {
            front[a][obj]
                .partial_cmp(&front[b][obj])
                .expect("finite fitness")
        });
        let lo = front[order[0]][obj];
        let hi = front[order[n - 1]][obj];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let spread = front[order[w + 1]][obj] - front[order[w - 1]][obj];
            distance[order[w]] += spread / range;
        }
    }
    distance
}

/// One SBX gene: children straddle the parents with spread `beta(u)`, and
/// their sum equals the parents' sum before clamping.
pub(crate) fn sbx_gene(a: f64, b: f64, u: f64, eta: f64) -> (f64, f64) {
    let beta = if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    };
    let c1 = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
    let c2 = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
    (c1, c2)
}

/// Simulated binary crossover on `[0, 1]` genomes. With probability
/// `1 - crossover_probability` the parents pass through unchanged; otherwise
/// each gene crosses independently with probability one half.
pub fn sbx_crossover<R: Rng>(
    a: &[f64],
    b: &[f64],
    crossover_probability: f64,
    eta: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), b.len(), "parents must share a dimension");
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    if rng.random::<f64>() >= crossover_probability {
        return (c1, c2);
    }
    for d in 0..a.len() {
        if rng.random::<f64>() < 0.5 {
            let u = rng.random::<f64>();
            let (x, y) = sbx_gene(a[d], b[d], u, eta);
            c1[d] = x.clamp(0.0, 1.0);
            c2[d] = y.clamp(0.0, 1.0);
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation on `[0, 1]` genomes: each gene mutates with
/// probability `mutation_probability`, with a perturbation that respects the
/// distance to the nearer bound.
pub fn polynomial_mutation<R: Rng>(
    genome: &[f64],
    mutation_probability: f64,
    eta: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = genome.to_vec();
    for v in &mut out {
        if rng.random::<f64>() >= mutation_probability {
            continue;
        }
        let u = rng.random::<f64>();
        let x = *v;
        let delta = if u < 0.5 {
            let base = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - x).powf(eta + 1.0);
            base.powf(1.0 / (eta + 1.0)) - 1.0
        } else {
            let base = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * x.powf(eta + 1.0);
            1.0 - base.powf(1.0 / (eta + 1.0))
        };
        *v = (x + delta).clamp(0.0, 1.0);
    }
    out
}

/// Survivor selection over a merged population: whole fronts in order, with
/// the split front truncated by crowding distance (ties broken by index for
/// determinism).
pub(crate) fn environmental_selection(fitnesses: &[Vec<f64>], target: usize) -> Result<Vec<usize>> {
    let fronts = fast_non_dominated_sort(fitnesses)?;
    let mut survivors = Vec::with_capacity(target);
    for front in fronts {
        if survivors.len() + front.len() <= target {
            survivors.extend_from_slice(&front);
            if survivors.len() == target {
                break;
            }
            continue;
        }
        let front_fits: Vec<Vec<f64>> = front.iter().map(|&i| fitnesses[i].clone()).collect();
        let crowd = crowding_distance(&front_fits);
        let mut by_crowding: Vec<usize> = (0..front.len()).collect();
        by_crowding.sort_by(|&a, &b| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .expect("crowding is never NaN")
                .then(front[a].cmp(&front[b]))
        });
        survivors.extend(
            by_crowding[..target - survivors.len()]
                .iter()
                .map(|&w| front[w]),
        );
        break;
    }
    Ok(survivors)
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_population(fitnesses: &[Vec<f64>]) -> Result<Ranked> {
    let fronts = fast_non_dominated_sort(fitnesses)?;
    let mut rank = vec![0usize; fitnesses.len()];
    let mut crowding = vec![0.0f64; fitnesses.len()];
    for (r, front) in fronts.iter().enumerate() {
        let front_fits: Vec<Vec<f64>> = front.iter().map(|&i| fitnesses[i].clone()).collect();
        let crowd = crowding_distance(&front_fits);
        for (&i, &c) in front.iter().zip(&crowd) {
            rank[i] = r;
            crowding[i] = c;
        }
    }
    Ok(Ranked { rank, crowding })
}

/// Binary tournament: lower rank wins, then larger crowding, then the
/// first-drawn contestant.
fn tournament<R: Rng>(ranked: &Ranked, n: usize, rng: &mut R) -> usize {
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    if ranked.rank[b] < ranked.rank[a]
        || (ranked.rank[b] == ranked.rank[a] && ranked.crowding[b] > ranked.crowding[a])
    {
        b
    } else {
        a
    }
}

fn evaluate_batch<F>(
    space: &DesignSpace,
    fitness: &F,
    genomes: &[Vec<f64>],
    expected_m: &mut Option<usize>,
) -> Result<(Vec<DesignPoint>, Vec<Vec<f64>>)>
where
    F: Fn(&DesignPoint) -> Result<Vec<f64>> + Sync,
{
    let points: Vec<DesignPoint> = genomes
        .iter()
        .map(|g| space.decode(g))
        .collect::<Result<_>>()?;
    let fits = par::try_map_collect(&points, |p| fitness(p))?;
    for f in &fits {
        match *expected_m {
            None => {
                if f.is_empty() {
                    return Err(Error::validation("fitness vectors must be non-empty"));
                }
                *expected_m = Some(f.len());
            }
            Some(m) if f.len() != m => {
                return Err(Error::validation(
                    "fitness vectors must share one objective count",
                ));
            }
            _ => {}
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("fitness values must be finite"));
        }
    }
    Ok((points, fits))
}

/// Runs NSGA-II. `initial_genomes`, when given, seeds the first population
/// (truncated or topped up with uniform random genomes as needed); every
/// genome must have the space's dimension.
pub fn evolve<F>(
    space: &DesignSpace,
    fitness: &F,
    config: &Nsga2Config,
    initial_genomes: Option<Vec<Vec<f64>>>,
) -> Result<EvolveOutcome>
where
    F: Fn(&DesignPoint) -> Result<Vec<f64>> + Sync,
{
    config.validate()?;
    let dim = space.dimension();
    let pop = config.population_size;
    let pm = config.mutation_probability.unwrap_or(1.0 / dim as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut genomes: Vec<Vec<f64>> = match initial_genomes {
        Some(mut seeds) => {
            seeds.truncate(pop);
            for (i, g) in seeds.iter().enumerate() {
                if g.len() != dim {
                    return Err(Error::validation(format!(
                        "initial genome {i} has length {} but the space has {dim} slots",
                        g.len()
                    )));
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::validation(format!(
                        "initial genome {i} must be finite"
                    )));
                }
            }
            seeds
        }
        None => Vec::new(),
    };
    while genomes.len() < pop {
        genomes.push((0..dim).map(|_| rng.random::<f64>()).collect());
    }

    let mut expected_m = None;
    let mut trace = Vec::with_capacity(pop * (config.generations + 1));
    let (points, mut fits) = evaluate_batch(space, fitness, &genomes, &mut expected_m)?;
    trace.extend(points.into_iter().zip(fits.iter().cloned()));
    let mut evaluations = pop;

    for _ in 0..config.generations {
        let ranked = rank_population(&fits)?;
        let mut offspring = Vec::with_capacity(pop);
        while offspring.len() < pop {
            let p1 = tournament(&ranked, pop, &mut rng);
            let p2 = tournament(&ranked, pop, &mut rng);
            let (c1, c2) = sbx_crossover(
                &genomes[p1],
                &genomes[p2],
                config.crossover_probability,
                config.crossover_index,
                &mut rng,
            );
            offspring.push(polynomial_mutation(
                &c1,
                pm,
                config.mutation_index,
                &mut rng,
            ));
            offspring.push(polynomial_mutation(
                &c2,
                pm,
                config.mutation_index,
                &mut rng,
            ));
        }

        let (off_points, off_fits) = evaluate_batch(space, fitness, &offspring, &mut expected_m)?;
        trace.extend(off_points.into_iter().zip(off_fits.iter().cloned()));
        evaluations += pop;

        let mut merged_genomes = genomes;
        merged_genomes.extend(offspring);
        let mut merged_fits = fits;
        merged_fits.extend(off_fits);
        let survivors = environmental_selection(&merged_fits, pop)?;
        genomes = survivors
            .iter()
            .map(|&i| merged_genomes[i].clone())
            .collect();
        fits = survivors.iter().map(|&i| merged_fits[i].clone()).collect();
    }

    let ranked = rank_population(&fits)?;
    let mut population = Vec::with_capacity(pop);
    for i in 0..pop {
        population.push(Individual {
            genome: genomes[i].clone(),
            fitness: fits[i].clone(),
            rank: ranked.rank[i],
            crowding: ranked.crowding[i],
        });
    }

    let mut front = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for ind in population.iter().filter(|ind| ind.rank == 0) {
        let point = space.decode(&ind.genome)?;
        if seen.insert(point.clone()) {
            front.push((point, ind.fitness.clone()));
        }
    }

    Ok(EvolveOutcome {
        population,
        front,
        evaluations,
        trace,
    })
}
