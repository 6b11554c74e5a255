//! Surrogate-assisted multi-objective optimization for layer-wise
//! crossbar compute-in-memory accelerator design.
//!
//! The crate models an accelerator configuration as a point in an ordinal
//! design space (per-layer weight/input bit precisions and subarray sizes,
//! global ADC precision and column sharing), scores it with an analytical
//! cost model over five objectives (accuracy, area, latency, energy, memory
//! utilization), and searches the space with a query-efficient loop: one
//! Gaussian-process surrogate per objective, a lower-confidence-bound
//! acquisition, NSGA-II over the acquisition vectors, and a hypervolume
//! improvement criterion that picks a single design to evaluate per
//! iteration. A plain NSGA-II run over the evaluator serves as the
//! iso-budget baseline.
//!
//! Modules are layered bottom-up:
//!
//! - [`space`]: ordinal design space, 0-1 encoding, seeded sampling.
//! - [`objective`]: objective senses and the minimization boundary.
//! - [`eval`]: the evaluator trait, the crossbar cost model, synthetic
//!   benchmark problems, and one-factor sweeps.
//! - [`pareto`] and [`hypervolume`]: dominance, exact and Monte Carlo
//!   hypervolume, and the incremental archive.
//! - [`gp`]: exact GP regression with ARD kernels and gradient-based
//!   hyperparameter fitting.
//! - [`acquisition`] and [`nsga2`]: LCB scoring and the evolutionary
//!   optimizer used both as the inner search and as the baseline.
//! - [`bo`]: the outer loop tying everything together.
//!
//! With the default `parallel` feature the batch-shaped work (GP fits and
//! updates, candidate scoring, hypervolume-improvement scans, Monte Carlo
//! chunks) runs on rayon; disabling it yields a dependency-free sequential
//! build. Results are bit-identical either way because every parallel
//! section maps a pure function over pre-split inputs in a fixed order.

pub mod acquisition;
pub mod bo;
mod error;
pub mod eval;
pub mod gp;
pub mod hypervolume;
pub mod nsga2;
pub mod objective;
pub mod par;
pub mod pareto;
pub mod space;

pub use bo::{BoConfig, BoEngine, BoRun, IterationRecord, RunLog};
pub use error::{Error, Result};
pub use eval::cim::{CimEvaluator, CimParams};
pub use eval::Evaluator;
pub use gp::{GpFitConfig, GpModel, KernelHyperparams};
pub use hypervolume::{hvi, hypervolume_exact, hypervolume_mc};
pub use nsga2::{EvolveOutcome, Nsga2Config};
pub use objective::{externalize, internalize, ObjectiveVector, Sense};
pub use pareto::{dominates, reference_from_costs, ParetoArchive};
pub use space::{DesignPoint, DesignSpace, LayerSpec, ParameterSpec};
