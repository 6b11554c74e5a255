//! Experiment configuration: a TOML file with every knob defaulted, unknown
//! keys rejected, and the fully resolved form echoed into `meta.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crossbow_core::eval::cim::CimParams;
use crossbow_core::gp::GpFitConfig;
use crossbow_core::nsga2::Nsga2Config;
use crossbow_core::objective::Sense;
use crossbow_core::space::{DesignSpace, LayerSpec, ParameterSpec};
use crossbow_core::BoConfig;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bo,
    Baseline,
    Sweep,
    Compare,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Mode::Bo => "bo",
            Mode::Baseline => "baseline",
            Mode::Sweep => "sweep",
            Mode::Compare => "compare",
        };
        f.write_str(name)
    }
}

/// Design space declaration: a named preset or an inline definition.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// `vgg8` or `vgg16`; mutually exclusive with inline layers/params.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub params: Vec<ParameterSpec>,
}

impl Default for SpaceSection {
    fn default() -> Self {
        SpaceSection {
            preset: Some("vgg8".to_string()),
            layers: Vec::new(),
            params: Vec::new(),
        }
    }
}

impl SpaceSection {
    pub fn build(&self) -> Result<DesignSpace, CliError> {
        match (
            &self.preset,
            self.layers.is_empty() && self.params.is_empty(),
        ) {
            (Some(name), true) => match name.as_str() {
                "vgg8" => Ok(DesignSpace::vgg8()),
                "vgg16" => Ok(DesignSpace::vgg16()),
                other => Err(CliError::config(format!(
                    "unknown space preset '{other}' (expected vgg8 or vgg16)"
                ))),
            },
            (None, false) => DesignSpace::new(self.layers.clone(), self.params.clone())
                .map_err(|e| CliError::config(e.to_string())),
            (Some(_), false) => Err(CliError::config(
                "space preset and inline layers/params are mutually exclusive",
            )),
            (None, true) => Err(CliError::config(
                "space section needs a preset or inline layers and params",
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    Cim,
    Zdt1,
    Dtlz2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluatorSection {
    pub kind: EvaluatorKind,
    /// Cost-model constants; read only when `kind = "cim"`.
    pub params: CimParams,
    /// Objective count; read only when `kind = "dtlz2"`.
    pub objectives: usize,
}

impl Default for EvaluatorSection {
    fn default() -> Self {
        EvaluatorSection {
            kind: EvaluatorKind::Cim,
            params: CimParams::default(),
            objectives: 3,
        }
    }
}

/// Mirrors [`BoConfig`] with TOML-friendly defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoSection {
    pub n_init: usize,
    pub n_iterations: usize,
    pub candidate_pool: usize,
    pub beta: f64,
    pub reference_margin: f64,
    pub gp: GpSection,
    pub inner: NsgaSection,
}

impl Default for BoSection {
    fn default() -> Self {
        BoSection {
            n_init: 10,
            n_iterations: 190,
            candidate_pool: 2000,
            beta: 2.0,
            reference_margin: 0.1,
            gp: GpSection::default(),
            inner: NsgaSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpSection {
    pub epochs: usize,
    pub step_size: f64,
}

impl Default for GpSection {
    fn default() -> Self {
        let base = GpFitConfig::default();
        GpSection {
            epochs: base.epochs,
            step_size: base.step_size,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NsgaSection {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub crossover_index: f64,
    pub mutation_probability: Option<f64>,
    pub mutation_index: f64,
}

impl Default for NsgaSection {
    fn default() -> Self {
        let base = Nsga2Config::default();
        NsgaSection {
            population_size: base.population_size,
            generations: base.generations,
            crossover_probability: base.crossover_probability,
            crossover_index: base.crossover_index,
            mutation_probability: base.mutation_probability,
            mutation_index: base.mutation_index,
        }
    }
}

impl NsgaSection {
    pub fn to_config(&self, seed: u64) -> Nsga2Config {
        Nsga2Config {
            population_size: self.population_size,
            generations: self.generations,
            crossover_probability: self.crossover_probability,
            crossover_index: self.crossover_index,
            mutation_probability: self.mutation_probability,
            mutation_index: self.mutation_index,
            seed,
        }
    }
}

/// Baseline evolutionary run; its budget is `population_size * (generations + 1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub crossover_index: f64,
    pub mutation_probability: Option<f64>,
    pub mutation_index: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            population_size: 20,
            generations: 9,
            crossover_probability: 0.9,
            crossover_index: 15.0,
            mutation_probability: None,
            mutation_index: 20.0,
        }
    }
}

impl BaselineSection {
    pub fn to_config(&self, seed: u64) -> Nsga2Config {
        Nsga2Config {
            population_size: self.population_size,
            generations: self.generations,
            crossover_probability: self.crossover_probability,
            crossover_index: self.crossover_index,
            mutation_probability: self.mutation_probability,
            mutation_index: self.mutation_index,
            seed,
        }
    }

    pub fn budget(&self) -> usize {
        self.population_size * (self.generations + 1)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Uniform level value per parameter name.
    pub baseline: BTreeMap<String, i64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            baseline: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub output_dir: String,
    pub seeds: Vec<u64>,
    pub space: SpaceSection,
    pub evaluator: EvaluatorSection,
    pub bo: BoSection,
    pub baseline: BaselineSection,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Bo,
            output_dir: "runs".to_string(),
            seeds: vec![0],
            space: SpaceSection::default(),
            evaluator: EvaluatorSection::default(),
            bo: BoSection::default(),
            baseline: BaselineSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::config(format!("config error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Serializes the resolved config back to TOML. Parsing the result
    /// yields the same config (normalization idempotence).
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self)
            .map_err(|e| CliError::config(format!("cannot serialize config: {e}")))
    }

    pub fn bo_config(&self, seed: u64) -> BoConfig {
        BoConfig {
            n_init: self.bo.n_init,
            n_iterations: self.bo.n_iterations,
            candidate_pool: self.bo.candidate_pool,
            beta: self.bo.beta,
            reference_margin: self.bo.reference_margin,
            gp: GpFitConfig {
                epochs: self.bo.gp.epochs,
                step_size: self.bo.gp.step_size,
            },
            inner: self.bo.inner.to_config(0),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::config("seeds must not be empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(CliError::config("seeds must be distinct"));
        }
        let space = self.space.build()?;
        build_evaluator(&self.evaluator, &space)?;
        match self.mode {
            Mode::Bo | Mode::Compare => {
                self.bo_config(0)
                    .validate()
                    .map_err(|e| CliError::config(e.to_string()))?;
            }
            Mode::Baseline => {}
            Mode::Sweep => {
                if self.sweep.baseline.is_empty() {
                    return Err(CliError::config(
                        "sweep mode needs a [sweep] baseline assignment",
                    ));
                }
            }
        }
        match self.mode {
            Mode::Baseline | Mode::Compare => {
                self.baseline
                    .to_config(0)
                    .validate()
                    .map_err(|e| CliError::config(e.to_string()))?;
            }
            _ => {}
        }
        if self.evaluator.kind == EvaluatorKind::Cim {
            self.evaluator
                .params
                .validate()
                .map_err(|e| CliError::config(e.to_string()))?;
        }
        if self.mode == Mode::Compare {
            let bo_budget = self.bo.n_init + self.bo.n_iterations;
            let baseline_budget = self.baseline.budget();
            if bo_budget != baseline_budget {
                return Err(CliError::config(format!(
                    "compare mode needs equal budgets: bo n_init + n_iterations = {bo_budget}, \
                     baseline population_size * (generations + 1) = {baseline_budget}"
                )));
            }
        }
        Ok(())
    }
}

/// The evaluator behind a config, boxed so modes can stay generic.
pub fn build_evaluator(
    section: &EvaluatorSection,
    space: &DesignSpace,
) -> Result<Box<dyn crossbow_core::Evaluator>, CliError> {
    use crossbow_core::eval::synthetic::{Dtlz2Evaluator, Zdt1Evaluator};
    let config_err = |e: crossbow_core::Error| CliError::config(e.to_string());
    match section.kind {
        EvaluatorKind::Cim => Ok(Box::new(
            crossbow_core::CimEvaluator::new(space.clone(), section.params.clone())
                .map_err(config_err)?,
        )),
        EvaluatorKind::Zdt1 => Ok(Box::new(
            Zdt1Evaluator::new(space.clone()).map_err(config_err)?,
        )),
        EvaluatorKind::Dtlz2 => Ok(Box::new(
            Dtlz2Evaluator::new(space.clone(), section.objectives).map_err(config_err)?,
        )),
    }
}

/// Objective senses without instantiating an evaluator (used by artifact
/// parsing to annotate headers).
pub fn sense_suffix(sense: Sense) -> &'static str {
    match sense {
        Sense::Minimize => ":min",
        Sense::Maximize => ":max",
    }
}
