//! The multi-objective Bayesian optimization loop.
//!
//! One run holds a design space, an expensive evaluator, one GP surrogate
//! per objective, and a Pareto archive with a frozen reference point. Each
//! iteration spends exactly one evaluator query:
//!
//! 1. refit the surrogates on all observations,
//! 2. score a fresh uniform candidate pool with the LCB acquisition,
//! 3. evolve the acquisition front with NSGA-II seeded by the best pool
//!    members (ranked by non-domination and crowding),
//! 4. map front scores back to cost units and compute each member's
//!    hypervolume improvement over the archive,
//! 5. evaluate the best not-yet-evaluated member (ties broken by crowding,
//!    then index; a fully evaluated front falls back to fresh uniform
//!    sampling),
//! 6. insert the true outcome into the archive and append it to the models.
//!
//! All randomness flows from one seeded generator consumed sequentially;
//! parallel sections only ever receive pre-split pure work, so runs are
//! reproducible bit for bit regardless of the thread count.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acquisition;
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::gp::{GpFitConfig, GpModel};
use crate::hypervolume::MAX_EXACT_OBJECTIVES;
use crate::nsga2::{self, Nsga2Config};
use crate::objective::{internalize, ObjectiveVector, Sense};
use crate::pareto::{reference_from_costs, ParetoArchive};
use crate::space::{DesignPoint, DesignSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct BoConfig {
    /// Uniform random designs evaluated before the loop starts.
    pub n_init: usize,
    /// Optimization iterations; each costs one evaluator query.
    pub n_iterations: usize,
    /// Size of the random candidate pool scored by the surrogates each
    /// iteration.
    pub candidate_pool: usize,
    /// Confidence multiplier of the LCB acquisition.
    pub beta: f64,
    /// Relative margin added per objective when freezing the reference
    /// point from the initial observations.
    pub reference_margin: f64,
    pub gp: GpFitConfig,
    /// Inner acquisition optimizer. Its `seed` field is ignored: each
    /// iteration derives a fresh seed from the run's generator.
    pub inner: Nsga2Config,
    pub seed: u64,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            n_init: 10,
            n_iterations: 190,
            candidate_pool: 2000,
            beta: 2.0,
            reference_margin: 0.1,
            gp: GpFitConfig::default(),
            inner: Nsga2Config::default(),
            seed: 0,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init < 2 {
            return Err(Error::validation("n_init must be at least 2"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::validation("beta must be finite and >= 0"));
        }
        if !(self.reference_margin.is_finite() && self.reference_margin >= 0.0) {
            return Err(Error::validation(
                "reference margin must be finite and >= 0",
            ));
        }
        if self.candidate_pool < self.inner.population_size {
            return Err(Error::validation(
                "candidate pool must be at least the inner population size",
            ));
        }
        self.gp.validate()?;
        self.inner.validate()
    }
}

/// Everything recorded about one optimization iteration.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    pub point: DesignPoint,
    /// Objectives as the evaluator reported them.
    pub objectives: ObjectiveVector,
    /// Archive hypervolume after inserting this iteration's observation.
    pub hypervolume: f64,
    /// Evaluator query counter after this iteration.
    pub queries: u64,
    pub wall_time: Duration,
}

/// Complete record of a run: the frozen reference frame, the initial
/// samples, and one record per iteration.
#[derive(Clone, Debug)]
pub struct RunLog {
    pub objective_names: Vec<String>,
    pub senses: Vec<Sense>,
    pub reference: Vec<f64>,
    /// Archive hypervolume right after initialization.
    pub initial_hypervolume: f64,
    /// Distinct initial designs in evaluation order.
    pub init: Vec<(DesignPoint, ObjectiveVector)>,
    pub records: Vec<IterationRecord>,
}

pub struct BoRun {
    pub log: RunLog,
    pub archive: ParetoArchive,
}

pub struct BoEngine<'a> {
    space: &'a DesignSpace,
    evaluator: &'a dyn Evaluator,
    config: BoConfig,
    rng: ChaCha8Rng,
    /// Encoded coordinates and internal costs of each distinct observation.
    x: Vec<Vec<f64>>,
    costs: Vec<Vec<f64>>,
    evaluated: HashSet<DesignPoint>,
    archive: ParetoArchive,
    models: Vec<GpModel>,
    log: RunLog,
    iteration: usize,
}

impl<'a> BoEngine<'a> {
    /// Draws and evaluates the initial designs, freezes the reference point
    /// from their costs, fills the archive, and fits the first surrogates.
    /// Duplicate initial draws are evaluated once and reused, so the query
    /// counter always counts distinct designs.
    pub fn initialize(
        space: &'a DesignSpace,
        evaluator: &'a dyn Evaluator,
        config: BoConfig,
    ) -> Result<Self> {
        config.validate()?;
        let senses = evaluator.senses().to_vec();
        let names = evaluator.objective_names().to_vec();
        if senses.len() != names.len() {
            return Err(Error::validation(
                "evaluator declares mismatched names and senses",
            ));
        }
        if senses.len() < 2 {
            return Err(Error::validation(
                "multi-objective optimization needs at least two objectives",
            ));
        }
        if senses.len() > MAX_EXACT_OBJECTIVES {
            return Err(Error::validation(format!(
                "archive hypervolume is exact and supports at most {MAX_EXACT_OBJECTIVES} objectives"
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let init_seed = rng.next_u64();
        let samples = space.sample_uniform(config.n_init, init_seed);

        let mut x = Vec::with_capacity(config.n_init);
        let mut costs: Vec<Vec<f64>> = Vec::with_capacity(config.n_init);
        let mut evaluated = HashSet::new();
        let mut init = Vec::with_capacity(config.n_init);
        let mut stream: Vec<(DesignPoint, Vec<f64>)> = Vec::with_capacity(config.n_init);
        for point in samples {
            if evaluated.contains(&point) {
                continue;
            }
            let raw = evaluator.evaluate(&point)?;
            let cost = internalize(&raw, &senses)?;
            x.push(space.encode(&point)?);
            costs.push(cost.clone());
            evaluated.insert(point.clone());
            init.push((point.clone(), raw));
            stream.push((point, cost));
        }

        let reference = reference_from_costs(&costs, config.reference_margin)?;
        let mut archive = ParetoArchive::new(reference.clone())?;
        for (point, cost) in stream {
            archive.insert(point, cost)?;
        }
        let initial_hypervolume = archive.hypervolume();

        let models = fit_models(&x, &costs, &config.gp)?;

        Ok(BoEngine {
            space,
            evaluator,
            config,
            rng,
            x,
            costs,
            evaluated,
            archive,
            models,
            log: RunLog {
                objective_names: names,
                senses,
                reference,
                initial_hypervolume,
                init,
                records: Vec::new(),
            },
            iteration: 0,
        })
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn models(&self) -> &[GpModel] {
        &self.models
    }

    pub fn observation_count(&self) -> usize {
        self.x.len()
    }

    /// Runs one optimization iteration and spends exactly one evaluator
    /// query.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let started = Instant::now();
        self.iteration += 1;

        self.models = fit_models(&self.x, &self.costs, &self.config.gp)?;

        let pool_seed = self.rng.next_u64();
        let pool = self
            .space
            .sample_uniform(self.config.candidate_pool, pool_seed);
        let encoded: Vec<Vec<f64>> = pool
            .iter()
            .map(|p| self.space.encode(p))
            .collect::<Result<_>>()?;
        let scores = acquisition::score_batch(&self.models, &encoded, self.config.beta);

        // Seed the acquisition optimizer with the best pool members by
        // (rank, crowding), i.e. the survivors a merged truncation would
        // keep.
        let keep = nsga2::environmental_selection(&scores, self.config.inner.population_size)?;
        let initial: Vec<Vec<f64>> = keep.iter().map(|&i| encoded[i].clone()).collect();

        let inner_seed = self.rng.next_u64();
        let inner_config = Nsga2Config {
            seed: inner_seed,
            ..self.config.inner.clone()
        };
        let models = &self.models;
        let space = self.space;
        let beta = self.config.beta;
        let fitness = move |p: &DesignPoint| -> Result<Vec<f64>> {
            Ok(acquisition::score_point(models, &space.encode(p)?, beta))
        };
        let outcome = nsga2::evolve(space, &fitness, &inner_config, Some(initial))?;

        // Front scores live in standardized units; de-standardize per model
        // to get predicted internal costs comparable with the archive.
        let front = outcome.front;
        let predicted: Vec<Vec<f64>> = front
            .iter()
            .map(|(_, scores)| {
                scores
                    .iter()
                    .zip(&self.models)
                    .map(|(&s, m)| m.destandardize(s))
                    .collect()
            })
            .collect();
        let archive = &self.archive;
        let improvements = crate::par::try_map_collect(&predicted, |cand| archive.hvi(cand))?;
        let front_scores: Vec<Vec<f64>> = front.iter().map(|(_, s)| s.clone()).collect();
        let crowding = nsga2::crowding_distance(&front_scores);

        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            improvements[b]
                .partial_cmp(&improvements[a])
                .expect("hvi is finite")
                .then(
                    crowding[b]
                        .partial_cmp(&crowding[a])
                        .expect("crowding is never NaN"),
                )
                .then(a.cmp(&b))
        });
        let chosen = order
            .iter()
            .map(|&i| &front[i].0)
            .find(|p| !self.evaluated.contains(*p))
            .cloned();
        let chosen = match chosen {
            Some(p) => p,
            None => self.sample_unevaluated()?,
        };

        let raw = self.evaluator.evaluate(&chosen)?;
        let cost = internalize(&raw, &self.log.senses)?;
        self.archive.insert(chosen.clone(), cost.clone())?;

        let encoded_point = self.space.encode(&chosen)?;
        let indices: Vec<usize> = (0..self.models.len()).collect();
        let bank = &self.models;
        let updated = crate::par::try_map_collect(&indices, |&i| {
            bank[i].update(encoded_point.clone(), cost[i])
        })?;
        self.models = updated;
        self.x.push(encoded_point);
        self.costs.push(cost);
        self.evaluated.insert(chosen.clone());

        let record = IterationRecord {
            iteration: self.iteration,
            point: chosen,
            objectives: raw,
            hypervolume: self.archive.hypervolume(),
            queries: self.evaluator.query_count(),
            wall_time: started.elapsed(),
        };
        self.log.records.push(record.clone());
        Ok(record)
    }

    /// Fallback when every acquisition-front design has already been
    /// evaluated: keep drawing uniform designs until a fresh one appears.
    fn sample_unevaluated(&mut self) -> Result<DesignPoint> {
        const BATCHES: usize = 256;
        const BATCH: usize = 64;
        for _ in 0..BATCHES {
            let seed = self.rng.next_u64();
            for point in self.space.sample_uniform(BATCH, seed) {
                if !self.evaluated.contains(&point) {
                    return Ok(point);
                }
            }
        }
        Err(Error::validation(
            "could not find an unevaluated design; the space appears exhausted",
        ))
    }

    pub fn into_run(self) -> BoRun {
        BoRun {
            log: self.log,
            archive: self.archive,
        }
    }

    /// Convenience driver: initialize, run every iteration, return the log
    /// and final archive.
    pub fn run(
        space: &'a DesignSpace,
        evaluator: &'a dyn Evaluator,
        config: BoConfig,
    ) -> Result<BoRun> {
        let iterations = config.n_iterations;
        let mut engine = BoEngine::initialize(space, evaluator, config)?;
        for _ in 0..iterations {
            engine.step()?;
        }
        Ok(engine.into_run())
    }
}

fn fit_models(x: &[Vec<f64>], costs: &[Vec<f64>], config: &GpFitConfig) -> Result<Vec<GpModel>> {
    let m = costs.first().map_or(0, |c| c.len());
    let objectives: Vec<usize> = (0..m).collect();
    crate::par::try_map_collect(&objectives, |&obj| {
        let y: Vec<f64> = costs.iter().map(|c| c[obj]).collect();
        GpModel::fit(x.to_vec(), y, config)
    })
}

/// Iso-budget baseline: plain NSGA-II spending its fitness calls directly on
/// the expensive evaluator. The returned trace carries internal costs in
/// evaluation order, ready for hypervolume-curve replay.
pub fn run_baseline(
    space: &DesignSpace,
    evaluator: &dyn Evaluator,
    config: &Nsga2Config,
) -> Result<nsga2::EvolveOutcome> {
    let senses = evaluator.senses().to_vec();
    let fitness = move |p: &DesignPoint| -> Result<Vec<f64>> {
        internalize(&evaluator.evaluate(p)?, &senses)
    };
    nsga2::evolve(space, &fitness, config, None)
}

/// Replays an evaluation stream through a fresh archive with the given
/// frozen reference, returning the running hypervolume after each
/// evaluation. Replaying a BO run's own stream against its own reference
/// reproduces the logged hypervolumes bit for bit.
pub fn hv_curve(stream: &[(DesignPoint, Vec<f64>)], reference: &[f64]) -> Result<Vec<f64>> {
    let mut archive = ParetoArchive::new(reference.to_vec())?;
    let mut curve = Vec::with_capacity(stream.len());
    for (point, cost) in stream {
        archive.insert(point.clone(), cost.clone())?;
        curve.push(archive.hypervolume());
    }
    Ok(curve)
}
