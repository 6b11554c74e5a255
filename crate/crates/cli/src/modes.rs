//! The experiment modes behind the CLI subcommands.
//!
//! Every mode writes its artifacts into a directory tree under the
//! configured output root:
//!
//! - `bo` / `baseline`: one `seed_<s>/` directory per seed.
//! - `compare`: `seed_<s>/bo/` and `seed_<s>/baseline/` pairs sharing the
//!   BO run's frozen reference point, plus a top-level `hv_curves.csv`.
//! - `sweep`: a single `sweep.csv` of uniform designs.
//!
//! A failed optimization still flushes whatever part of the run log exists
//! before the error propagates, so partial runs stay inspectable.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crossbow_core::bo::{hv_curve, run_baseline, BoEngine, RunLog};
use crossbow_core::eval::sweep::{all_single_overrides, sweep_uniform};
use crossbow_core::nsga2::EvolveOutcome;
use crossbow_core::objective::internalize;
use crossbow_core::pareto::{reference_from_costs, ParetoArchive};
use crossbow_core::space::{DesignPoint, DesignSpace};

use crate::artifacts::{
    self, write_hv_curves, write_meta, write_pareto_json, write_runlog, write_sweep, FrontFile,
    MetaFile, RunlogRow,
};
use crate::config::{build_evaluator, ExperimentConfig, Mode};
use crate::CliError;

/// Applies `--seed` and `--out` overrides, then runs the configured mode.
pub fn run_experiment(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
) -> Result<(), CliError> {
    let mut config = config.clone();
    if let Some(seed) = seed_override {
        config.seeds = vec![seed];
    }
    if let Some(out) = out_override {
        config.output_dir = out.display().to_string();
    }
    config.validate()?;

    let out_root = PathBuf::from(&config.output_dir);
    match config.mode {
        Mode::Bo => {
            for &seed in &config.seeds {
                let dir = out_root.join(format!("seed_{seed}"));
                run_bo_seed(&config, seed, &dir)?;
            }
            Ok(())
        }
        Mode::Baseline => {
            for &seed in &config.seeds {
                let dir = out_root.join(format!("seed_{seed}"));
                run_baseline_seed(&config, seed, &dir, None)?;
            }
            Ok(())
        }
        Mode::Sweep => run_sweep(&config, &out_root),
        Mode::Compare => run_compare(&config, &out_root),
    }
}

/// Output of one seeded run, kept for curve assembly in compare mode.
struct SeedRun {
    reference: Vec<f64>,
    curve: Vec<f64>,
}

fn run_bo_seed(config: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedRun, CliError> {
    std::fs::create_dir_all(dir)?;
    let started = Instant::now();
    let space = config.space.build()?;
    let evaluator = build_evaluator(&config.evaluator, &space)?;
    log::info!("bo seed {seed}: {} iterations", config.bo.n_iterations);

    let mut engine = BoEngine::initialize(&space, evaluator.as_ref(), config.bo_config(seed))?;
    let mut failure = None;
    for _ in 0..config.bo.n_iterations {
        match engine.step() {
            Ok(record) => log::debug!(
                "seed {seed} iteration {}: hv {}",
                record.iteration,
                record.hypervolume
            ),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let queries = evaluator.query_count();
    let run = engine.into_run();
    let curve = write_bo_artifacts(
        config,
        seed,
        dir,
        &space,
        &run.log,
        &run.archive,
        queries,
        started,
    )?;
    match failure {
        Some(e) => Err(CliError::runtime(format!(
            "bo seed {seed} aborted after {} iterations (artifacts flushed): {e}",
            run.log.records.len()
        ))),
        None => Ok(SeedRun {
            reference: run.log.reference.clone(),
            curve,
        }),
    }
}

/// Writes runlog/pareto/meta for a BO run and returns its per-query
/// hypervolume curve.
#[allow(clippy::too_many_arguments)]
fn write_bo_artifacts(
    config: &ExperimentConfig,
    seed: u64,
    dir: &Path,
    space: &DesignSpace,
    log: &RunLog,
    archive: &ParetoArchive,
    queries: u64,
    started: Instant,
) -> Result<Vec<f64>, CliError> {
    // The init phase logs raw vectors only; replaying its stream through
    // a fresh archive reproduces the running hypervolume exactly.
    let mut stream: Vec<(DesignPoint, Vec<f64>)> = Vec::new();
    for (point, raw) in &log.init {
        stream.push((point.clone(), internalize(raw, &log.senses)?));
    }
    let init_curve = hv_curve(&stream, &log.reference)?;

    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for (i, ((point, raw), hv)) in log.init.iter().zip(&init_curve).enumerate() {
        rows.push(OwnedRow {
            iteration: 0,
            point: point.clone(),
            objectives: raw.values().to_vec(),
            hypervolume: *hv,
            queries: (i + 1) as u64,
        });
        curve.push(*hv);
    }
    for record in &log.records {
        rows.push(OwnedRow {
            iteration: record.iteration,
            point: record.point.clone(),
            objectives: record.objectives.values().to_vec(),
            hypervolume: record.hypervolume,
            queries: record.queries,
        });
        curve.push(record.hypervolume);
    }
    write_owned_runlog(
        &dir.join("runlog.csv"),
        space,
        &log.objective_names,
        &log.senses,
        &rows,
    )?;

    let front = FrontFile::from_archive(space, archive, &log.objective_names, &log.senses)?;
    artifacts::emit_front(&dir.join("pareto.csv"), &front)?;
    write_pareto_json(
        &dir.join("pareto.json"),
        archive,
        &log.objective_names,
        &log.senses,
    )?;
    write_meta(
        &dir.join("meta.json"),
        &MetaFile {
            tool: "crossbow",
            version: env!("CARGO_PKG_VERSION"),
            mode: Mode::Bo.to_string(),
            seed: Some(seed),
            queries,
            reference: Some(log.reference.clone()),
            hypervolume: Some(archive.hypervolume()),
            wall_seconds: started.elapsed().as_secs_f64(),
            config,
        },
    )?;
    Ok(curve)
}

struct OwnedRow {
    iteration: usize,
    point: DesignPoint,
    objectives: Vec<f64>,
    hypervolume: f64,
    queries: u64,
}

fn write_owned_runlog(
    path: &Path,
    space: &DesignSpace,
    names: &[String],
    senses: &[crossbow_core::Sense],
    rows: &[OwnedRow],
) -> Result<(), CliError> {
    let borrowed: Vec<RunlogRow<'_>> = rows
        .iter()
        .map(|r| RunlogRow {
            iteration: r.iteration,
            point: &r.point,
            objectives: &r.objectives,
            hypervolume: r.hypervolume,
            queries: r.queries,
        })
        .collect();
    write_runlog(path, space, names, senses, &borrowed)
}

/// Runs the evolutionary baseline for one seed. In compare mode the paired
/// BO run's frozen reference is passed in; standalone runs freeze their own
/// from the first `n_init` evaluations of the trace.
fn run_baseline_seed(
    config: &ExperimentConfig,
    seed: u64,
    dir: &Path,
    shared_reference: Option<&[f64]>,
) -> Result<SeedRun, CliError> {
    std::fs::create_dir_all(dir)?;
    let started = Instant::now();
    let space = config.space.build()?;
    let evaluator = build_evaluator(&config.evaluator, &space)?;
    let nsga = config.baseline.to_config(seed);
    log::info!("baseline seed {seed}: budget {}", config.baseline.budget());

    let outcome: EvolveOutcome = run_baseline(&space, evaluator.as_ref(), &nsga)?;
    let senses = evaluator.senses().to_vec();
    let names = evaluator.objective_names().to_vec();

    let reference = match shared_reference {
        Some(r) => r.to_vec(),
        None => {
            let prefix: Vec<Vec<f64>> = outcome
                .trace
                .iter()
                .take(config.bo.n_init)
                .map(|(_, costs)| costs.clone())
                .collect();
            reference_from_costs(&prefix, config.bo.reference_margin)?
        }
    };
    let curve = hv_curve(&outcome.trace, &reference)?;

    let mut archive = ParetoArchive::new(reference.clone())?;
    for (point, costs) in &outcome.trace {
        archive.insert(point.clone(), costs.clone())?;
    }

    let pop = nsga.population_size;
    let mut rows = Vec::new();
    for (i, ((point, costs), hv)) in outcome.trace.iter().zip(&curve).enumerate() {
        let raw = crossbow_core::externalize(costs, &senses)?;
        rows.push(OwnedRow {
            // The initial population is batch 0; each generation is one
            // more batch.
            iteration: i / pop,
            point: point.clone(),
            objectives: raw.values().to_vec(),
            hypervolume: *hv,
            queries: (i + 1) as u64,
        });
    }
    write_owned_runlog(&dir.join("runlog.csv"), &space, &names, &senses, &rows)?;

    let front = FrontFile::from_archive(&space, &archive, &names, &senses)?;
    artifacts::emit_front(&dir.join("pareto.csv"), &front)?;
    write_pareto_json(&dir.join("pareto.json"), &archive, &names, &senses)?;
    write_meta(
        &dir.join("meta.json"),
        &MetaFile {
            tool: "crossbow",
            version: env!("CARGO_PKG_VERSION"),
            mode: Mode::Baseline.to_string(),
            seed: Some(seed),
            queries: evaluator.query_count(),
            reference: Some(reference.clone()),
            hypervolume: Some(archive.hypervolume()),
            wall_seconds: started.elapsed().as_secs_f64(),
            config,
        },
    )?;
    Ok(SeedRun { reference, curve })
}

fn run_sweep(config: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let started = Instant::now();
    let space = config.space.build()?;
    let evaluator = build_evaluator(&config.evaluator, &space)?;
    let overrides = all_single_overrides(&space, &config.sweep.baseline);
    log::info!("sweep: {} designs", overrides.len() + 1);
    let rows = sweep_uniform(
        &space,
        evaluator.as_ref(),
        &config.sweep.baseline,
        &overrides,
    )?;
    write_sweep(
        &dir.join("sweep.csv"),
        &space,
        evaluator.objective_names(),
        evaluator.senses(),
        &rows,
    )?;
    write_meta(
        &dir.join("meta.json"),
        &MetaFile {
            tool: "crossbow",
            version: env!("CARGO_PKG_VERSION"),
            mode: Mode::Sweep.to_string(),
            seed: None,
            queries: evaluator.query_count(),
            reference: None,
            hypervolume: None,
            wall_seconds: started.elapsed().as_secs_f64(),
            config,
        },
    )?;
    Ok(())
}

/// Iso-budget comparison: per seed, one BO run and one baseline run that
/// reuses the BO run's frozen reference so the hypervolume curves are
/// directly comparable.
fn run_compare(config: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let started = Instant::now();
    let budget = config.bo.n_init + config.bo.n_iterations;

    let mut bo_curves = Vec::new();
    let mut baseline_curves = Vec::new();
    for &seed in &config.seeds {
        let seed_dir = dir.join(format!("seed_{seed}"));
        let bo = run_bo_seed(config, seed, &seed_dir.join("bo"))?;
        if bo.curve.len() != budget {
            return Err(CliError::runtime(format!(
                "bo seed {seed} spent {} queries instead of {budget}: initial samples \
                 collided; enlarge the space or lower n_init",
                bo.curve.len()
            )));
        }
        let baseline = run_baseline_seed(
            config,
            seed,
            &seed_dir.join("baseline"),
            Some(&bo.reference),
        )?;
        bo_curves.push(bo.curve);
        baseline_curves.push(baseline.curve);
    }

    write_hv_curves(
        &dir.join("hv_curves.csv"),
        &config.seeds,
        &bo_curves,
        &baseline_curves,
    )?;
    write_meta(
        &dir.join("meta.json"),
        &MetaFile {
            tool: "crossbow",
            version: env!("CARGO_PKG_VERSION"),
            mode: Mode::Compare.to_string(),
            seed: None,
            queries: (budget * config.seeds.len() * 2) as u64,
            reference: None,
            hypervolume: None,
            wall_seconds: started.elapsed().as_secs_f64(),
            config,
        },
    )?;
    Ok(())
}

/// The `hv` subcommand: exact hypervolume of a front file against a raw
/// reference point given in the file's own objective units.
pub fn front_hypervolume(front_path: &Path, reference_raw: &[f64]) -> Result<f64, CliError> {
    let front = artifacts::parse_front(front_path)?;
    if reference_raw.len() != front.senses.len() {
        return Err(CliError::runtime(format!(
            "reference has {} values but the front declares {} objectives",
            reference_raw.len(),
            front.senses.len()
        )));
    }
    let costs = front.costs()?;
    let reference = internalize(
        &crossbow_core::ObjectiveVector::new(reference_raw.to_vec())?,
        &front.senses,
    )?;
    Ok(crossbow_core::hypervolume_exact(&costs, &reference)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn tiny_compare_config(dir: &Path) -> ExperimentConfig {
        let toml = format!(
            r#"
mode = "compare"
output_dir = "{}"
seeds = [0, 1]

[space]
preset = "vgg8"

[evaluator]
kind = "cim"

[bo]
n_init = 4
n_iterations = 8
candidate_pool = 32

[bo.gp]
epochs = 3

[bo.inner]
population_size = 8
generations = 2

[baseline]
population_size = 4
generations = 2
"#,
            dir.display()
        );
        ExperimentConfig::from_toml(&toml).unwrap()
    }

    #[test]
    fn compare_writes_the_full_artifact_tree() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_compare_config(dir.path());
        run_experiment(&config, None, None).unwrap();

        for seed in [0, 1] {
            for method in ["bo", "baseline"] {
                let base = dir.path().join(format!("seed_{seed}")).join(method);
                for file in ["runlog.csv", "pareto.csv", "pareto.json", "meta.json"] {
                    assert!(base.join(file).exists(), "missing {method} {file}");
                }
            }
        }
        let curves = std::fs::read_to_string(dir.path().join("hv_curves.csv")).unwrap();
        let mut lines = curves.lines();
        assert_eq!(
            lines.next().unwrap(),
            "queries,bo_seed_0,bo_seed_1,baseline_seed_0,baseline_seed_1,bo_mean,bo_std,baseline_mean,baseline_std"
        );
        assert_eq!(lines.count(), 12);
    }

    #[test]
    fn identical_runs_write_byte_identical_artifacts() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut config = tiny_compare_config(dir_a.path());
        config.mode = Mode::Bo;
        config.seeds = vec![3];

        run_experiment(&config, None, Some(dir_a.path())).unwrap();
        run_experiment(&config, None, Some(dir_b.path())).unwrap();
        for file in ["runlog.csv", "pareto.csv"] {
            let a = std::fs::read(dir_a.path().join("seed_3").join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join("seed_3").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
    }

    #[test]
    fn baseline_runlog_numbers_batches_and_counts_queries() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_compare_config(dir.path());
        config.mode = Mode::Baseline;
        config.seeds = vec![5];
        run_experiment(&config, None, None).unwrap();

        let text = std::fs::read_to_string(dir.path().join("seed_5").join("runlog.csv")).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 12);
        let first: Vec<&str> = rows[0].split(',').collect();
        let last: Vec<&str> = rows[11].split(',').collect();
        assert_eq!(first[0], "0");
        assert_eq!(last[0], "2");
        let queries: Vec<u64> = rows
            .iter()
            .map(|r| r.split(',').next_back().unwrap().parse().unwrap())
            .collect();
        assert_eq!(queries, (1..=12).collect::<Vec<u64>>());
        let hvs: Vec<f64> = rows
            .iter()
            .map(|r| {
                let fields: Vec<&str> = r.split(',').collect();
                fields[fields.len() - 2].parse().unwrap()
            })
            .collect();
        assert!(hvs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn front_hypervolume_matches_known_value() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.csv");
        std::fs::write(&path, "slot,f1:min,f2:min\n0,1,2\n1,2,1\n").unwrap();
        let hv = front_hypervolume(&path, &[3.0, 3.0]).unwrap();
        assert_eq!(hv, 3.0);
    }

    #[test]
    fn front_hypervolume_internalizes_maximized_objectives() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.csv");
        // Maximizing accuracy: 95 beats the reference 90 by 5 units.
        std::fs::write(&path, "slot,acc:max,area:min\n0,95,1\n").unwrap();
        let hv = front_hypervolume(&path, &[90.0, 3.0]).unwrap();
        assert_eq!(hv, 10.0);
    }
}
